#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ambc/bitseq.hpp"
#include "ambc/lte_waveform.hpp"
#include "ambc/zed.hpp"

namespace ambc {

/// One complex channel estimate per slot.
struct ChannelEstimateSeries {
  std::vector<cdouble> estimates;
  double rate = 2000.0;
  long first_slot = 0;

  std::size_t size() const { return estimates.size(); }
};

/// Least-squares estimate (received / pilot) on every CRS RE of a slot,
/// averaged over all CRS REs of the slot. Throws Errc::insufficient_data for
/// a grid shorter than one slot.
ChannelEstimateSeries estimate_channel(const ResourceGrid& rx, const CrsConfig& crs,
                                       long first_slot = 0);

/// Time-domain input: front-end demodulation followed by the grid estimator.
ChannelEstimateSeries estimate_channel(const SampleBuffer& rx, const GridConfig& cfg,
                                       const CrsConfig& crs, long first_slot = 0);

/// Contrast observable: square root of the mean received power per slot over
/// all samples, ignoring the pilots.
ChannelEstimateSeries wideband_power_series(const SampleBuffer& rx, const GridConfig& cfg);

struct ReceiverConfig {
  BitSequence sync = default_sync();
  double threshold = 0.8;
  int symbol_samples = 80;
  int bin_f0 = 5;
  int bin_f1 = 20;
  int offset_candidates = 8;
  std::size_t data_bits = kDataBits;

  /// Bins and window length implied by the FSK tones at an estimate rate.
  static ReceiverConfig for_fsk(const FskConfig& fsk, double rate = 2000.0);

  std::size_t frame_bits() const { return sync.size() + data_bits; }
  /// Start of the k-th timing hypothesis within a symbol, in estimates.
  int candidate_offset(int k) const { return k * symbol_samples / offset_candidates; }
  void validate() const;
};

struct SymbolDecision {
  std::uint8_t bit;
  double confidence;
};

/// Energy detector over one symbol window: magnitudes of the estimates,
/// mean removed, DFT energy at the two FSK bins. Ties go to bit 0.
class SymbolDetector {
 public:
  explicit SymbolDetector(const ReceiverConfig& cfg);

  SymbolDecision detect(std::span<const cdouble> window) const;
  /// Same detector fed with real magnitudes.
  SymbolDecision detect_magnitudes(std::span<const double> magnitudes) const;

 private:
  int n_;
  std::vector<cdouble> tw0_;
  std::vector<cdouble> tw1_;
  mutable std::vector<double> scratch_;
};

/// Throws Errc::insufficient_data when the window runs past the series.
SymbolDecision detect_symbol(const ChannelEstimateSeries& series, std::size_t window_start,
                             const ReceiverConfig& cfg);

/// Hard decisions for one timing hypothesis: bit j covers estimates
/// [offset + j * symbol_samples, offset + (j + 1) * symbol_samples).
struct DecisionStream {
  int offset = 0;
  std::vector<std::uint8_t> bits;
  std::vector<double> confidence;
};

std::vector<DecisionStream> demodulate_streams(const ChannelEstimateSeries& series,
                                               const ReceiverConfig& cfg);

struct SyncResult {
  std::size_t frame_start = 0;  // bit index within the candidate stream
  double correlation = 0.0;
  int offset_candidate = 0;
  long sample_start = 0;  // estimate index of the first sync bit
  BitSequence data_bits;
  double confidence = 0.0;  // mean symbol confidence over the frame
};

struct SyncStats {
  std::size_t windows = 0;   // sync windows evaluated across all streams
  std::size_t raw_hits = 0;  // windows at or above the threshold
};

/// Slides the sync word over every stream one bit at a time. A window at or
/// above the threshold with a complete payload after it is a candidate;
/// candidates closer than one frame less half a symbol (in estimates)
/// compete: the highest correlation wins, then the higher mean confidence,
/// then the earlier start.
/// Results come back in time order.
std::vector<SyncResult> synchronize(std::span<const DecisionStream> streams,
                                    const ReceiverConfig& cfg, SyncStats* stats = nullptr);

double compute_ber(const SyncResult& result, const BitSequence& truth);

/// CSV with header "slot,real,imag,magnitude".
void write_estimates_csv(std::ostream& out, const ChannelEstimateSeries& series);

}  // namespace ambc
