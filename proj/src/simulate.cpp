#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "ambc/error.hpp"
#include "ambc/harness.hpp"

namespace ambc {

namespace {

constexpr long kWaveformBlockSlots = 400;

struct Scene {
  const ExperimentConfig& cfg;
  const ResolvedPoint& point;
  std::uint64_t seed;
  long n_slots;
  std::optional<ZedTransmitter> zed;
  std::vector<double> loads;  // per subframe

  double state_at(double t) const { return zed ? zed->state_at(t) : 0.0; }
};

/// Pilots of `pilots` below subcarrier `limit` (pilots are sorted).
int pilots_below(const std::vector<Pilot>& pilots, int limit) {
  const auto it = std::lower_bound(pilots.begin(), pilots.end(), limit,
                                   [](const Pilot& p, int v) { return p.subcarrier < v; });
  return static_cast<int>(it - pilots.begin());
}

/// GRID mode over slots [begin, end). Both outputs are indexed by absolute slot.
void grid_chunk(const Scene& scene, const CrsTable& table, long begin, long end,
                std::vector<cdouble>& crs_out, std::vector<cdouble>* power_out) {
  const auto& cfg = scene.cfg;
  const auto& crs = cfg.crs;
  const auto& grid = cfg.grid;
  const ChannelParams& p = scene.point.channel;
  const double variance = calibrate_noise(p);
  const ChannelGains gains(p, scene.seed);
  const int n_sc = grid.n_subcarriers();
  const int per_slot = table.pilots_per_slot();
  const bool aggregate = cfg.grid_noise == GridNoise::slot_aggregate;
  SlotNoise crs_noise(scene.seed, Stream::crs_noise, aggregate ? 1 : per_slot);
  Engine power_rng(derive_seed(scene.seed, Stream::power, static_cast<std::uint64_t>(begin)));
  GaussianSource power_noise(derive_seed(scene.seed, Stream::power, ~static_cast<std::uint64_t>(begin)));
  std::gamma_distribution<double> gamma_rest(n_sc - 1, 1.0);
  std::gamma_distribution<double> gamma_all(n_sc, 1.0);
  const double data_power = scene.point.traffic.data_re_power;

  cdouble g[kSymbolsPerSlot];
  for (long slot = begin; slot < end; ++slot) {
    for (int l = 0; l < kSymbolsPerSlot; ++l) {
      const double t = static_cast<double>(slot) * kSlotDuration + grid.symbol_midpoint(l);
      g[l] = gains.composite(t, scene.state_at(t));
    }
    if (variance > 0.0) crs_noise.seek(slot);

    cdouble estimate{};
    if (aggregate) {
      cdouble sum{};
      for (std::size_t k = 0; k < crs.symbol_positions.size(); ++k) {
        sum += g[crs.symbol_positions[k]] * static_cast<double>(table.pilots(slot, k).size());
      }
      estimate = sum / static_cast<double>(per_slot);
      if (variance > 0.0) estimate += crs_noise.next(variance / per_slot);
    } else {
      cdouble sum{};
      for (std::size_t k = 0; k < crs.symbol_positions.size(); ++k) {
        const cdouble gk = g[crs.symbol_positions[k]];
        for (const auto& pilot : table.pilots(slot, k)) {
          const cdouble y = gk * pilot.value + (variance > 0.0 ? crs_noise.next(variance) : cdouble{});
          sum += y * std::conj(pilot.value);
        }
      }
      estimate = sum / static_cast<double>(per_slot);
    }
    crs_out[static_cast<std::size_t>(slot)] = estimate;

    if (!power_out) continue;
    const double load = scene.loads[static_cast<std::size_t>(slot / kSlotsPerSubframe)];
    const int data_sc = kSubcarriersPerRb * loaded_rbs(load, grid.bandwidth_rb);
    double total = 0.0;
    std::size_t crs_index = 0;
    for (int l = 0; l < kSymbolsPerSlot; ++l) {
      int n_pilots = 0;
      int pilots_in_data = 0;
      if (crs_index < crs.symbol_positions.size() && crs.symbol_positions[crs_index] == l) {
        const auto& pilots = table.pilots(slot, crs_index);
        n_pilots = static_cast<int>(pilots.size());
        pilots_in_data = pilots_below(pilots, data_sc);
        ++crs_index;
      }
      const double a = n_pilots + (data_sc - pilots_in_data) * data_power;
      double sym = std::norm(g[l]) * a;
      if (variance > 0.0) {
        if (a > 0.0) {
          const cdouble c = power_noise.complex(variance * a);
          sym += 2.0 * (g[l] * c).real() + std::norm(c) / a + variance * gamma_rest(power_rng);
        } else {
          sym += variance * gamma_all(power_rng);
        }
      }
      total += sym;
    }
    (*power_out)[static_cast<std::size_t>(slot)] =
        cdouble(std::sqrt(total / static_cast<double>(kSymbolsPerSlot * n_sc)), 0.0);
  }
}

void simulate_grid(const Scene& scene, Observation& obs) {
  const CrsTable table(scene.cfg.crs, scene.cfg.grid.n_subcarriers());
  const long chunk = SlotNoise::kChunkSlots;
  const long n_chunks = (scene.n_slots + chunk - 1) / chunk;
  auto& crs_out = obs.crs.estimates;
  crs_out.assign(static_cast<std::size_t>(scene.n_slots), cdouble{});
  std::vector<cdouble>* power_out = nullptr;
  if (obs.power) {
    obs.power->estimates.assign(static_cast<std::size_t>(scene.n_slots), cdouble{});
    power_out = &obs.power->estimates;
  }
  auto work = [&](long first_chunk, long stride) {
    for (long c = first_chunk; c < n_chunks; c += stride) {
      grid_chunk(scene, table, c * chunk, std::min(scene.n_slots, (c + 1) * chunk), crs_out, power_out);
    }
  };
  const long workers = std::clamp<long>(scene.cfg.workers, 1, std::max<long>(n_chunks, 1));
  if (workers == 1) {
    work(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void simulate_waveform(const Scene& scene, Observation& obs) {
  const auto& cfg = scene.cfg;
  const ReflectionFn s = [&scene](double t) { return scene.state_at(t); };
  obs.crs.estimates.reserve(static_cast<std::size_t>(scene.n_slots));
  if (obs.power) obs.power->estimates.reserve(static_cast<std::size_t>(scene.n_slots));
  for (long first = 0; first < scene.n_slots; first += kWaveformBlockSlots) {
    const long n = std::min(kWaveformBlockSlots, scene.n_slots - first);
    const auto grid = build_grid_block(cfg.grid, cfg.crs, scene.loads,
                                       scene.point.traffic.data_re_power, first, n, scene.seed);
    const auto tx = synthesize_baseband(grid, cfg.grid);
    const auto rx = apply_channel(tx, cfg.grid, cfg.crs, s, scene.point.channel, scene.seed, first);
    const auto est = estimate_channel(rx, cfg.grid, cfg.crs, first);
    obs.crs.estimates.insert(obs.crs.estimates.end(), est.estimates.begin(), est.estimates.end());
    if (obs.power) {
      const auto pw = wideband_power_series(rx, cfg.grid);
      obs.power->estimates.insert(obs.power->estimates.end(), pw.estimates.begin(), pw.estimates.end());
    }
  }
}

}  // namespace

Observation simulate_observation(const ExperimentConfig& cfg, const ResolvedPoint& point,
                                 std::uint64_t seed) {
  const auto n_slots = static_cast<long>(std::floor(cfg.duration_s / kSlotDuration + 1e-9));
  if (n_slots < 1) {
    throw Error(Errc::insufficient_data,
                fmt::format("duration {} s is shorter than one slot", cfg.duration_s));
  }
  Scene scene{cfg, point, seed, n_slots, std::nullopt, {}};
  if (cfg.zed.enabled) {
    scene.zed.emplace(cfg.frame(), cfg.fsk, cfg.zed.start_offset_s, cfg.zed.clock_skew_ppm);
  }
  const bool need_loads = cfg.mode == Mode::waveform || cfg.contrast_receiver;
  if (need_loads) {
    scene.loads = traffic_loads(point.traffic, static_cast<std::size_t>((n_slots + 1) / 2), seed);
  }

  Observation obs;
  obs.crs.rate = ExperimentConfig::kEstimateRate;
  if (cfg.contrast_receiver) {
    obs.power.emplace();
    obs.power->rate = ExperimentConfig::kEstimateRate;
  }
  if (cfg.mode == Mode::grid) {
    simulate_grid(scene, obs);
  } else {
    simulate_waveform(scene, obs);
  }

  const ZedTransmitter nominal(cfg.frame(), cfg.fsk);
  obs.expected_wallclock =
      static_cast<std::size_t>(std::floor(cfg.duration_s / nominal.frame_period() + 1e-9));
  if (scene.zed) obs.truth = scene.zed->frames_within(cfg.duration_s);
  return obs;
}

}  // namespace ambc
