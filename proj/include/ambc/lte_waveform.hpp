#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ambc/random.hpp"

namespace ambc {

using cdouble = std::complex<double>;

inline constexpr int kSymbolsPerSlot = 7;
inline constexpr int kSlotsPerSubframe = 2;
inline constexpr int kSlotsPerRadioFrame = 20;
inline constexpr double kSlotDuration = 0.5e-3;
inline constexpr double kSubframeDuration = 1e-3;
inline constexpr int kSubcarriersPerRb = 12;

/// Downlink numerology. Defaults describe a 10 MHz carrier.
struct GridConfig {
  int bandwidth_rb = 50;
  double subcarrier_spacing = 15000.0;
  int fft_size = 1024;
  double sample_rate = 15.36e6;
  double carrier_hz = 768e6;  // informational only

  int n_subcarriers() const { return kSubcarriersPerRb * bandwidth_rb; }
  /// Normal cyclic prefix: 160/2048 of the FFT size for symbol 0, 144/2048 otherwise.
  int cp_length(int symbol_in_slot) const;
  int symbol_samples(int symbol_in_slot) const { return cp_length(symbol_in_slot) + fft_size; }
  int slot_samples() const;
  /// Sample offset of a symbol's cyclic prefix from the slot start.
  int symbol_offset(int symbol_in_slot) const;
  /// Time from the slot start to the middle of the symbol body, seconds.
  double symbol_midpoint(int symbol_in_slot) const;
  /// FFT bin of an active subcarrier; the 600 active carriers straddle DC,
  /// which stays empty.
  int fft_bin(int subcarrier) const;

  void validate() const;
};

/// Antenna-port-0 cell-specific reference signals.
struct CrsConfig {
  int cell_id = 0;
  int frequency_stride = 6;
  std::vector<int> symbol_positions{0, 4};

  int frequency_shift() const { return cell_id % frequency_stride; }
  bool carries_crs(int symbol_in_slot) const;
  /// Pilots per CRS-bearing symbol for the given carrier width.
  int pilots_per_symbol(int n_subcarriers) const;
  int pilots_per_slot(int n_subcarriers) const;

  void validate() const;
};

struct Pilot {
  int subcarrier;
  cdouble value;

  friend bool operator==(const Pilot&, const Pilot&) = default;
};

/// Unit-modulus QPSK pilots of one CRS symbol. Values come from a
/// counter-based hash of (cell_id, slot within the radio frame, symbol,
/// subcarrier), so they repeat every 20 slots like LTE's CRS.
std::vector<Pilot> generate_crs_symbols(const CrsConfig& crs, long slot, int symbol,
                                        int n_subcarriers = 600);

/// Pilots for all 20 slots of a radio frame, precomputed.
class CrsTable {
 public:
  CrsTable(const CrsConfig& crs, int n_subcarriers);

  /// Pilots of the k-th CRS symbol (index into symbol_positions) in `slot`.
  const std::vector<Pilot>& pilots(long slot, std::size_t k) const;
  const CrsConfig& config() const { return crs_; }
  int pilots_per_slot() const { return pilots_per_slot_; }

 private:
  CrsConfig crs_;
  int pilots_per_slot_ = 0;
  std::vector<std::vector<Pilot>> table_;
};

enum class TrafficKind { constant_load, two_state_markov };

struct TrafficModel {
  TrafficKind kind = TrafficKind::two_state_markov;
  /// For constant-load: fraction of resource blocks carrying data every subframe.
  double duty_target = 0.5;
  double p_on_to_off = 0.1;
  double p_off_to_on = 0.1;
  /// Linear power of each occupied data RE (pilots have unit power).
  double data_re_power = 1.0;

  static TrafficModel constant(double duty);
  /// On/off chain whose stationary duty is `duty`, keeping p_on_to_off.
  static TrafficModel bursty(double duty, double p_on_to_off = 0.1);

  double stationary_duty() const;
  void validate() const;
};

struct TrafficState {
  bool on = false;
  bool started = false;
};

/// Result of one subframe: the new state and the fraction of resource blocks
/// loaded with data (0 or 1 for the on/off chain).
struct TrafficStep {
  TrafficState state;
  double load;
};

/// Advances the traffic model by one 1 ms subframe. The first call of a
/// two-state chain draws the initial state from the stationary distribution.
TrafficStep step_traffic(const TrafficModel& model, TrafficState state, Engine& rng);

/// Per-subframe loads for a whole run, from the run's traffic stream.
std::vector<double> traffic_loads(const TrafficModel& model, std::size_t n_subframes,
                                  std::uint64_t seed);

/// Number of resource blocks carrying data at a given load.
int loaded_rbs(double load, int bandwidth_rb);

enum class ReKind : std::uint8_t { empty = 0, crs = 1, data = 2 };

/// Frequency x time map of resource elements. Storage is symbol-major;
/// symbol index s covers slot s / 7. Received grids carry no RE-kind mask.
class ResourceGrid {
 public:
  ResourceGrid() = default;
  ResourceGrid(int n_subcarriers, int n_symbols, bool with_mask = true);

  int n_subcarriers() const { return n_sc_; }
  int n_symbols() const { return n_sym_; }
  long n_slots() const { return n_sym_ / kSymbolsPerSlot; }
  bool has_mask() const { return !kinds_.empty(); }

  cdouble& at(int subcarrier, int symbol) { return cells_[index(subcarrier, symbol)]; }
  const cdouble& at(int subcarrier, int symbol) const { return cells_[index(subcarrier, symbol)]; }
  ReKind kind(int subcarrier, int symbol) const { return kinds_[index(subcarrier, symbol)]; }
  void set_kind(int subcarrier, int symbol, ReKind k) { kinds_[index(subcarrier, symbol)] = k; }

  std::span<cdouble> symbol(int s) {
    return {cells_.data() + static_cast<std::size_t>(s) * n_sc_, static_cast<std::size_t>(n_sc_)};
  }
  std::span<const cdouble> symbol(int s) const {
    return {cells_.data() + static_cast<std::size_t>(s) * n_sc_, static_cast<std::size_t>(n_sc_)};
  }
  std::span<const cdouble> cells() const { return cells_; }
  std::span<cdouble> cells() { return cells_; }
  std::span<const ReKind> kinds() const { return kinds_; }

  double energy() const;

 private:
  std::size_t index(int subcarrier, int symbol) const {
    return static_cast<std::size_t>(symbol) * n_sc_ + subcarrier;
  }

  int n_sc_ = 0;
  int n_sym_ = 0;
  std::vector<cdouble> cells_;
  std::vector<ReKind> kinds_;
};

/// CRS in every slot, unit-power QPSK (scaled by data_re_power) on the data
/// REs of loaded resource blocks, zeros elsewhere. Throws
/// Errc::insufficient_data when the duration holds less than one slot.
ResourceGrid build_grid(const GridConfig& cfg, const CrsConfig& crs, const TrafficModel& traffic,
                        double duration, std::uint64_t seed);

/// Slots [first_slot, first_slot + n_slots) of the same grid, given the
/// per-subframe loads of the whole run. Data symbols are seeded per slot, so
/// blocks concatenate to exactly the grid build_grid returns.
ResourceGrid build_grid_block(const GridConfig& cfg, const CrsConfig& crs,
                              std::span<const double> subframe_loads, double data_re_power,
                              long first_slot, long n_slots, std::uint64_t seed);

struct SampleBuffer {
  std::vector<cdouble> samples;
  double sample_rate = 0.0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Unitary inverse DFT per OFDM symbol with the normal cyclic prefix prepended.
SampleBuffer synthesize_baseband(const ResourceGrid& grid, const GridConfig& cfg);

/// Receiver front end: strips the cyclic prefix, applies a unitary DFT and
/// returns the active subcarriers (no RE-kind mask).
ResourceGrid demodulate_baseband(const SampleBuffer& rx, const GridConfig& cfg);

/// Binary snapshot of a grid. Layout (little-endian):
///   char[8]  magic "AMBCGRD1"
///   u32      n_subcarriers, n_symbols
///   u32      bandwidth_rb, fft_size
///   f64      subcarrier_spacing, sample_rate, carrier_hz
///   u32      cell_id, frequency_stride, n_crs_symbols, crs symbol positions...
///   f32[2 * n_subcarriers * n_symbols]  re, im interleaved, subcarrier-major
///            (all symbols of subcarrier 0, then subcarrier 1, ...)
void write_grid_snapshot(std::ostream& out, const ResourceGrid& grid, const GridConfig& cfg,
                         const CrsConfig& crs);

struct GridSnapshot {
  GridConfig grid_config;
  CrsConfig crs_config;
  ResourceGrid grid;
};

GridSnapshot read_grid_snapshot(std::istream& in);

}  // namespace ambc
