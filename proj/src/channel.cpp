#include "ambc/channel.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ambc/error.hpp"
#include "fft.hpp"

namespace ambc {

ChannelParams ChannelParams::from_ratio(double backscatter_ratio_db, double phase_rad,
                                        cdouble h_direct) {
  ChannelParams p;
  p.h_direct = h_direct;
  p.h_backscatter = std::isinf(backscatter_ratio_db) && backscatter_ratio_db < 0
                        ? cdouble{}
                        : h_direct * std::pow(10.0, backscatter_ratio_db / 20.0) *
                              std::polar(1.0, phase_rad);
  return p;
}

double ChannelParams::backscatter_ratio_db() const {
  if (std::abs(h_backscatter) == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(std::norm(h_backscatter) / std::norm(h_direct));
}

void ChannelParams::validate() const {
  if (std::abs(h_direct) == 0.0) throw Error(Errc::config, "direct path gain must be nonzero");
  if (std::norm(h_backscatter) > std::norm(h_direct) * (1.0 + 1e-12)) {
    throw Error(Errc::config,
                fmt::format("backscatter ratio {:.2f} dB exceeds 0 dB", backscatter_ratio_db()));
  }
  if (target_snr_db && !std::isfinite(*target_snr_db)) {
    throw Error(Errc::config, "target SNR must be finite (use no SNR to disable noise)");
  }
  if (fading == Fading::block_rayleigh && !(coherence_s > 0.0)) {
    throw Error(Errc::config, "coherence interval must be positive");
  }
}

double calibrate_noise(const ChannelParams& p, double crs_re_power) {
  if (!(crs_re_power > 0.0)) {
    throw Error(Errc::invalid_argument,
                fmt::format("CRS RE power must be positive, got {}", crs_re_power));
  }
  if (!p.target_snr_db) return 0.0;
  return std::norm(p.h_direct) * crs_re_power / std::pow(10.0, *p.target_snr_db / 10.0);
}

ChannelGains::ChannelGains(const ChannelParams& p, std::uint64_t seed)
    : p_(p), seed_(seed), hd_(p.h_direct), hb_(p.h_backscatter) {}

void ChannelGains::load_block(long block) const {
  GaussianSource g(derive_seed(seed_, Stream::fading, static_cast<std::uint64_t>(block)));
  hd_ = p_.h_direct * g.complex(1.0);
  hb_ = p_.h_backscatter * g.complex(1.0);
  block_ = block;
}

cdouble ChannelGains::composite(double t, double s) const {
  if (p_.fading == Fading::block_rayleigh) {
    const auto block = static_cast<long>(std::floor(t / p_.coherence_s));
    if (block != block_) load_block(block);
  }
  return hd_ + hb_ * s;
}

SlotNoise::SlotNoise(std::uint64_t seed, Stream stream, long draws_per_slot)
    : seed_(seed), stream_(stream), draws_per_slot_(draws_per_slot), source_(0) {}

void SlotNoise::seek(long slot) {
  const long chunk = slot / kChunkSlots;
  if (chunk != chunk_ || slot < next_slot_) {
    source_ = GaussianSource(derive_seed(seed_, stream_, static_cast<std::uint64_t>(chunk)));
    chunk_ = chunk;
    next_slot_ = chunk * kChunkSlots;
  }
  for (; next_slot_ < slot; ++next_slot_) {
    for (long i = 0; i < draws_per_slot_; ++i) source_.complex(1.0);
  }
  next_slot_ = slot + 1;
}

ResourceGrid apply_channel(const ResourceGrid& tx, const GridConfig& cfg, const CrsConfig& crs,
                           const ReflectionFn& s, const ChannelParams& p, std::uint64_t seed,
                           long first_slot) {
  cfg.validate();
  p.validate();
  if (tx.n_subcarriers() != cfg.n_subcarriers() || tx.n_symbols() % kSymbolsPerSlot != 0) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("grid is {} x {}, expected {} subcarriers and whole slots",
                            tx.n_subcarriers(), tx.n_symbols(), cfg.n_subcarriers()));
  }
  const CrsTable table(crs, cfg.n_subcarriers());
  const int n_sc = cfg.n_subcarriers();
  const double variance = calibrate_noise(p);
  const ChannelGains gains(p, seed);
  SlotNoise crs_noise(seed, Stream::crs_noise, table.pilots_per_slot());
  SlotNoise aux_noise(seed, Stream::aux_noise, kSymbolsPerSlot * n_sc - table.pilots_per_slot());

  ResourceGrid rx(n_sc, tx.n_symbols(), false);
  std::vector<std::uint8_t> is_crs(static_cast<std::size_t>(n_sc));
  for (long k = 0; k < tx.n_slots(); ++k) {
    const long slot = first_slot + k;
    if (variance > 0.0) {
      crs_noise.seek(slot);
      aux_noise.seek(slot);
    }
    std::size_t crs_index = 0;
    for (int l = 0; l < kSymbolsPerSlot; ++l) {
      const int sym = static_cast<int>(k * kSymbolsPerSlot + l);
      const double t = slot * kSlotDuration + cfg.symbol_midpoint(l);
      const cdouble g = gains.composite(t, s(t));
      const auto in = tx.symbol(sym);
      auto out = rx.symbol(sym);
      std::fill(is_crs.begin(), is_crs.end(), 0);
      if (crs_index < crs.symbol_positions.size() && crs.symbol_positions[crs_index] == l) {
        for (const auto& pilot : table.pilots(slot, crs_index)) {
          const int sc = pilot.subcarrier;
          is_crs[static_cast<std::size_t>(sc)] = 1;
          out[sc] = g * in[sc] + (variance > 0.0 ? crs_noise.next(variance) : cdouble{});
        }
        ++crs_index;
      }
      for (int sc = 0; sc < n_sc; ++sc) {
        if (is_crs[static_cast<std::size_t>(sc)]) continue;
        out[sc] = g * in[sc] + (variance > 0.0 ? aux_noise.next(variance) : cdouble{});
      }
    }
  }
  return rx;
}

SampleBuffer apply_channel(const SampleBuffer& tx, const GridConfig& cfg, const CrsConfig& crs,
                           const ReflectionFn& s, const ChannelParams& p, std::uint64_t seed,
                           long first_slot) {
  cfg.validate();
  p.validate();
  const auto slot_len = static_cast<std::size_t>(cfg.slot_samples());
  if (std::abs(tx.sample_rate - cfg.sample_rate) > 1e-6 * cfg.sample_rate ||
      tx.samples.size() % slot_len != 0) {
    throw Error(Errc::representation_mismatch,
                fmt::format("{} samples at {} Hz are not whole slots of the configured waveform",
                            tx.samples.size(), tx.sample_rate));
  }
  const CrsTable table(crs, cfg.n_subcarriers());
  const int n = cfg.fft_size;
  const double variance = calibrate_noise(p);
  const ChannelGains gains(p, seed);
  const long cp_total = cfg.slot_samples() - kSymbolsPerSlot * n;
  SlotNoise crs_noise(seed, Stream::crs_noise, table.pilots_per_slot());
  SlotNoise aux_noise(seed, Stream::aux_noise,
                      kSymbolsPerSlot * n - table.pilots_per_slot() + cp_total);
  detail::UnitaryDft idft(n, detail::UnitaryDft::Direction::inverse);
  std::vector<cdouble> bins(static_cast<std::size_t>(n));
  std::vector<cdouble> body(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> is_crs(static_cast<std::size_t>(n));

  SampleBuffer rx;
  rx.sample_rate = tx.sample_rate;
  rx.samples.resize(tx.samples.size());
  const long n_slots = static_cast<long>(tx.samples.size() / slot_len);
  std::size_t pos = 0;
  const double t0 = static_cast<double>(first_slot) * kSlotDuration;
  for (long k = 0; k < n_slots; ++k) {
    const long slot = first_slot + k;
    if (variance > 0.0) {
      crs_noise.seek(slot);
      aux_noise.seek(slot);
    }
    std::size_t crs_index = 0;
    for (int l = 0; l < kSymbolsPerSlot; ++l) {
      const int cp = cfg.cp_length(l);
      const std::size_t len = static_cast<std::size_t>(cp + n);
      for (std::size_t i = 0; i < len; ++i) {
        const double t = t0 + static_cast<double>(pos + i) / cfg.sample_rate;
        rx.samples[pos + i] = gains.composite(t, s(t)) * tx.samples[pos + i];
      }
      if (variance > 0.0) {
        std::fill(is_crs.begin(), is_crs.end(), 0);
        if (crs_index < crs.symbol_positions.size() && crs.symbol_positions[crs_index] == l) {
          for (const auto& pilot : table.pilots(slot, crs_index)) {
            const int bin = cfg.fft_bin(pilot.subcarrier);
            is_crs[static_cast<std::size_t>(bin)] = 1;
            bins[static_cast<std::size_t>(bin)] = crs_noise.next(variance);
          }
          ++crs_index;
        }
        for (int b = 0; b < n; ++b) {
          if (!is_crs[static_cast<std::size_t>(b)]) bins[static_cast<std::size_t>(b)] = aux_noise.next(variance);
        }
        idft.execute(bins, body);
        for (int i = 0; i < cp; ++i) rx.samples[pos + i] += aux_noise.next(variance);
        for (int i = 0; i < n; ++i) rx.samples[pos + cp + i] += body[static_cast<std::size_t>(i)];
      }
      pos += len;
    }
  }
  return rx;
}

}  // namespace ambc
