#include "ambc/lte_waveform.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ambc/error.hpp"

namespace ambc {

int GridConfig::cp_length(int symbol_in_slot) const {
  return symbol_in_slot == 0 ? fft_size * 160 / 2048 : fft_size * 144 / 2048;
}

int GridConfig::slot_samples() const {
  int total = 0;
  for (int l = 0; l < kSymbolsPerSlot; ++l) total += symbol_samples(l);
  return total;
}

int GridConfig::symbol_offset(int symbol_in_slot) const {
  int offset = 0;
  for (int l = 0; l < symbol_in_slot; ++l) offset += symbol_samples(l);
  return offset;
}

double GridConfig::symbol_midpoint(int symbol_in_slot) const {
  const double mid = symbol_offset(symbol_in_slot) + cp_length(symbol_in_slot) + 0.5 * fft_size;
  return mid / sample_rate;
}

int GridConfig::fft_bin(int subcarrier) const {
  const int half = n_subcarriers() / 2;
  return subcarrier < half ? fft_size - half + subcarrier : subcarrier - half + 1;
}

void GridConfig::validate() const {
  if (bandwidth_rb <= 0) {
    throw Error(Errc::config, fmt::format("bandwidth_rb must be positive, got {}", bandwidth_rb));
  }
  if (fft_size <= 0 || fft_size % 128 != 0) {
    throw Error(Errc::config,
                fmt::format("fft_size must be a positive multiple of 128, got {}", fft_size));
  }
  if (n_subcarriers() + 1 > fft_size) {
    throw Error(Errc::config, fmt::format("{} resource blocks do not fit a {}-point FFT",
                                          bandwidth_rb, fft_size));
  }
  if (subcarrier_spacing <= 0) throw Error(Errc::config, "subcarrier_spacing must be positive");
  const double expected = fft_size * subcarrier_spacing;
  if (std::abs(sample_rate - expected) > 1e-6 * expected) {
    throw Error(Errc::config, fmt::format("sample_rate {} differs from fft_size x spacing = {}",
                                          sample_rate, expected));
  }
  const double slot = slot_samples() / sample_rate;
  if (std::abs(slot - kSlotDuration) > 1e-9) {
    throw Error(Errc::config, fmt::format("slot lasts {} s instead of 0.5 ms", slot));
  }
}

bool CrsConfig::carries_crs(int symbol_in_slot) const {
  for (int p : symbol_positions)
    if (p == symbol_in_slot) return true;
  return false;
}

int CrsConfig::pilots_per_symbol(int n_subcarriers) const {
  const int shift = frequency_shift();
  return shift >= n_subcarriers ? 0 : (n_subcarriers - shift + frequency_stride - 1) / frequency_stride;
}

int CrsConfig::pilots_per_slot(int n_subcarriers) const {
  return pilots_per_symbol(n_subcarriers) * static_cast<int>(symbol_positions.size());
}

void CrsConfig::validate() const {
  if (cell_id < 0) throw Error(Errc::config, fmt::format("cell_id must be >= 0, got {}", cell_id));
  if (frequency_stride <= 0) throw Error(Errc::config, "frequency_stride must be positive");
  if (symbol_positions.empty()) throw Error(Errc::config, "at least one CRS symbol is required");
  for (std::size_t i = 0; i < symbol_positions.size(); ++i) {
    const int p = symbol_positions[i];
    if (p < 0 || p >= kSymbolsPerSlot) {
      throw Error(Errc::config, fmt::format("CRS symbol position {} outside 0..6", p));
    }
    if (i > 0 && p <= symbol_positions[i - 1]) {
      throw Error(Errc::config, "CRS symbol positions must be strictly increasing");
    }
  }
}

namespace {

cdouble qpsk_from_bits(std::uint64_t bits) {
  constexpr double a = 0.70710678118654752440;
  return {(bits & 1u) ? -a : a, (bits & 2u) ? -a : a};
}

}  // namespace

std::vector<Pilot> generate_crs_symbols(const CrsConfig& crs, long slot, int symbol,
                                        int n_subcarriers) {
  if (!crs.carries_crs(symbol)) {
    throw Error(Errc::invalid_argument,
                fmt::format("symbol {} carries no CRS for this configuration", symbol));
  }
  const auto slot_in_frame =
      static_cast<std::uint64_t>(((slot % kSlotsPerRadioFrame) + kSlotsPerRadioFrame) %
                                 kSlotsPerRadioFrame);
  const std::uint64_t cell_key = mix64(static_cast<std::uint64_t>(crs.cell_id) + 0x435253ULL);
  std::vector<Pilot> pilots;
  pilots.reserve(static_cast<std::size_t>(crs.pilots_per_symbol(n_subcarriers)));
  for (int k = crs.frequency_shift(); k < n_subcarriers; k += crs.frequency_stride) {
    const std::uint64_t counter = (slot_in_frame << 40) |
                                  (static_cast<std::uint64_t>(symbol) << 32) |
                                  static_cast<std::uint64_t>(k);
    pilots.push_back({k, qpsk_from_bits(mix64(cell_key ^ counter))});
  }
  return pilots;
}

CrsTable::CrsTable(const CrsConfig& crs, int n_subcarriers) : crs_(crs) {
  crs_.validate();
  pilots_per_slot_ = crs_.pilots_per_slot(n_subcarriers);
  table_.reserve(kSlotsPerRadioFrame * crs_.symbol_positions.size());
  for (int s = 0; s < kSlotsPerRadioFrame; ++s)
    for (int l : crs_.symbol_positions) table_.push_back(generate_crs_symbols(crs_, s, l, n_subcarriers));
}

const std::vector<Pilot>& CrsTable::pilots(long slot, std::size_t k) const {
  const long s = slot % kSlotsPerRadioFrame;
  return table_[static_cast<std::size_t>(s) * crs_.symbol_positions.size() + k];
}

TrafficModel TrafficModel::constant(double duty) {
  TrafficModel m;
  m.kind = TrafficKind::constant_load;
  m.duty_target = duty;
  return m;
}

TrafficModel TrafficModel::bursty(double duty, double p_on_to_off) {
  if (!(duty > 0.0 && duty < 1.0)) {
    throw Error(Errc::config, fmt::format("bursty traffic needs 0 < duty < 1, got {}", duty));
  }
  TrafficModel m;
  m.kind = TrafficKind::two_state_markov;
  m.duty_target = duty;
  m.p_on_to_off = p_on_to_off;
  m.p_off_to_on = p_on_to_off * duty / (1.0 - duty);
  m.validate();
  return m;
}

double TrafficModel::stationary_duty() const {
  if (kind == TrafficKind::constant_load) return duty_target;
  return p_off_to_on / (p_on_to_off + p_off_to_on);
}

void TrafficModel::validate() const {
  auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::config, fmt::format("{} must lie in [0, 1], got {}", name, p));
    }
  };
  check(duty_target, "duty_target");
  check(p_on_to_off, "p_on_to_off");
  check(p_off_to_on, "p_off_to_on");
  if (kind == TrafficKind::two_state_markov && p_on_to_off + p_off_to_on <= 0.0) {
    throw Error(Errc::config, "two-state traffic needs a nonzero transition probability");
  }
  if (!(data_re_power >= 0.0)) throw Error(Errc::config, "data_re_power must be >= 0");
}

TrafficStep step_traffic(const TrafficModel& model, TrafficState state, Engine& rng) {
  if (model.kind == TrafficKind::constant_load) {
    state.on = model.duty_target > 0.0;
    state.started = true;
    return {state, model.duty_target};
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  if (!state.started) {
    state.on = u < model.stationary_duty();
    state.started = true;
  } else if (state.on) {
    state.on = !(u < model.p_on_to_off);
  } else {
    state.on = u < model.p_off_to_on;
  }
  return {state, state.on ? 1.0 : 0.0};
}

std::vector<double> traffic_loads(const TrafficModel& model, std::size_t n_subframes,
                                  std::uint64_t seed) {
  Engine rng(derive_seed(seed, Stream::traffic, 0));
  std::vector<double> loads(n_subframes);
  TrafficState state;
  for (auto& load : loads) {
    const auto step = step_traffic(model, state, rng);
    state = step.state;
    load = step.load;
  }
  return loads;
}

int loaded_rbs(double load, int bandwidth_rb) {
  return static_cast<int>(std::lround(load * bandwidth_rb));
}

ResourceGrid::ResourceGrid(int n_subcarriers, int n_symbols, bool with_mask)
    : n_sc_(n_subcarriers), n_sym_(n_symbols),
      cells_(static_cast<std::size_t>(n_subcarriers) * n_symbols) {
  if (with_mask) kinds_.assign(cells_.size(), ReKind::empty);
}

double ResourceGrid::energy() const {
  double e = 0.0;
  for (const auto& c : cells_) e += std::norm(c);
  return e;
}

ResourceGrid build_grid_block(const GridConfig& cfg, const CrsConfig& crs,
                              std::span<const double> subframe_loads, double data_re_power,
                              long first_slot, long n_slots, std::uint64_t seed) {
  cfg.validate();
  if (n_slots < 1) throw Error(Errc::insufficient_data, "grid block needs at least one slot");
  if (first_slot < 0 ||
      static_cast<std::size_t>((first_slot + n_slots - 1) / kSlotsPerSubframe) >= subframe_loads.size()) {
    throw Error(Errc::insufficient_data,
                fmt::format("slots [{}, {}) are not covered by {} subframe loads", first_slot,
                            first_slot + n_slots, subframe_loads.size()));
  }
  const CrsTable table(crs, cfg.n_subcarriers());
  const int n_sc = cfg.n_subcarriers();
  ResourceGrid grid(n_sc, static_cast<int>(n_slots * kSymbolsPerSlot));
  const double data_amp = std::sqrt(data_re_power);

  for (long k = 0; k < n_slots; ++k) {
    const long slot = first_slot + k;
    const int data_sc =
        kSubcarriersPerRb * loaded_rbs(subframe_loads[static_cast<std::size_t>(slot / kSlotsPerSubframe)],
                                       cfg.bandwidth_rb);
    Engine data_rng(derive_seed(seed, Stream::data, static_cast<std::uint64_t>(slot)));
    for (int l = 0; l < kSymbolsPerSlot; ++l) {
      const int sym = static_cast<int>(k * kSymbolsPerSlot + l);
      for (std::size_t c = 0; c < crs.symbol_positions.size(); ++c) {
        if (crs.symbol_positions[c] != l) continue;
        for (const auto& p : table.pilots(slot, c)) {
          grid.at(p.subcarrier, sym) = p.value;
          grid.set_kind(p.subcarrier, sym, ReKind::crs);
        }
      }
      std::uint64_t bits = 0;
      int available = 0;
      for (int sc = 0; sc < data_sc; ++sc) {
        if (grid.kind(sc, sym) == ReKind::crs) continue;
        if (available == 0) {
          bits = data_rng();
          available = 32;
        }
        grid.at(sc, sym) = data_amp * qpsk_from_bits(bits & 3u);
        grid.set_kind(sc, sym, ReKind::data);
        bits >>= 2;
        --available;
      }
    }
  }
  return grid;
}

ResourceGrid build_grid(const GridConfig& cfg, const CrsConfig& crs, const TrafficModel& traffic,
                        double duration, std::uint64_t seed) {
  cfg.validate();
  traffic.validate();
  const auto n_slots = static_cast<long>(std::floor(duration / kSlotDuration + 1e-9));
  if (!(duration > 0.0) || n_slots < 1) {
    throw Error(Errc::insufficient_data,
                fmt::format("duration {} s is shorter than one 0.5 ms slot", duration));
  }
  const auto loads = traffic_loads(traffic, static_cast<std::size_t>((n_slots + 1) / 2), seed);
  return build_grid_block(cfg, crs, loads, traffic.data_re_power, 0, n_slots, seed);
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(Errc::io, "truncated grid snapshot");
  return value;
}

constexpr char kSnapshotMagic[8] = {'A', 'M', 'B', 'C', 'G', 'R', 'D', '1'};

}  // namespace

void write_grid_snapshot(std::ostream& out, const ResourceGrid& grid, const GridConfig& cfg,
                         const CrsConfig& crs) {
  static_assert(std::endian::native == std::endian::little, "snapshot layout is little-endian");
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n_subcarriers()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n_symbols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.bandwidth_rb));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.fft_size));
  put<double>(out, cfg.subcarrier_spacing);
  put<double>(out, cfg.sample_rate);
  put<double>(out, cfg.carrier_hz);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(crs.cell_id));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(crs.frequency_stride));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(crs.symbol_positions.size()));
  for (int p : crs.symbol_positions) put<std::uint32_t>(out, static_cast<std::uint32_t>(p));
  for (int sc = 0; sc < grid.n_subcarriers(); ++sc) {
    for (int s = 0; s < grid.n_symbols(); ++s) {
      put<float>(out, static_cast<float>(grid.at(sc, s).real()));
      put<float>(out, static_cast<float>(grid.at(sc, s).imag()));
    }
  }
  if (!out) throw Error(Errc::io, "failed writing grid snapshot");
}

GridSnapshot read_grid_snapshot(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
    throw Error(Errc::io, "not a grid snapshot");
  }
  GridSnapshot snap;
  const auto n_sc = get<std::uint32_t>(in);
  const auto n_sym = get<std::uint32_t>(in);
  snap.grid_config.bandwidth_rb = static_cast<int>(get<std::uint32_t>(in));
  snap.grid_config.fft_size = static_cast<int>(get<std::uint32_t>(in));
  snap.grid_config.subcarrier_spacing = get<double>(in);
  snap.grid_config.sample_rate = get<double>(in);
  snap.grid_config.carrier_hz = get<double>(in);
  snap.crs_config.cell_id = static_cast<int>(get<std::uint32_t>(in));
  snap.crs_config.frequency_stride = static_cast<int>(get<std::uint32_t>(in));
  const auto n_pos = get<std::uint32_t>(in);
  if (n_pos > kSymbolsPerSlot) throw Error(Errc::io, "corrupt grid snapshot header");
  snap.crs_config.symbol_positions.clear();
  for (std::uint32_t i = 0; i < n_pos; ++i) {
    snap.crs_config.symbol_positions.push_back(static_cast<int>(get<std::uint32_t>(in)));
  }
  snap.grid = ResourceGrid(static_cast<int>(n_sc), static_cast<int>(n_sym), false);
  for (std::uint32_t sc = 0; sc < n_sc; ++sc) {
    for (std::uint32_t s = 0; s < n_sym; ++s) {
      const float re = get<float>(in);
      const float im = get<float>(in);
      snap.grid.at(static_cast<int>(sc), static_cast<int>(s)) = {re, im};
    }
  }
  return snap;
}

}  // namespace ambc
