#include "ambc/receiver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "ambc/error.hpp"

namespace ambc {

ChannelEstimateSeries estimate_channel(const ResourceGrid& rx, const CrsConfig& crs, long first_slot) {
  if (rx.n_slots() < 1) {
    throw Error(Errc::insufficient_data,
                fmt::format("received grid has {} symbols, one slot needs {}", rx.n_symbols(),
                            kSymbolsPerSlot));
  }
  const CrsTable table(crs, rx.n_subcarriers());
  ChannelEstimateSeries series;
  series.first_slot = first_slot;
  series.estimates.reserve(static_cast<std::size_t>(rx.n_slots()));
  for (long k = 0; k < rx.n_slots(); ++k) {
    const long slot = first_slot + k;
    cdouble sum{};
    for (std::size_t i = 0; i < crs.symbol_positions.size(); ++i) {
      const int sym = static_cast<int>(k * kSymbolsPerSlot + crs.symbol_positions[i]);
      for (const auto& pilot : table.pilots(slot, i)) {
        sum += rx.at(pilot.subcarrier, sym) * std::conj(pilot.value);
      }
    }
    series.estimates.push_back(sum / static_cast<double>(table.pilots_per_slot()));
  }
  return series;
}

ChannelEstimateSeries estimate_channel(const SampleBuffer& rx, const GridConfig& cfg,
                                       const CrsConfig& crs, long first_slot) {
  return estimate_channel(demodulate_baseband(rx, cfg), crs, first_slot);
}

ChannelEstimateSeries wideband_power_series(const SampleBuffer& rx, const GridConfig& cfg) {
  const auto slot_len = static_cast<std::size_t>(cfg.slot_samples());
  if (rx.samples.size() < slot_len) {
    throw Error(Errc::insufficient_data, "buffer shorter than one slot");
  }
  ChannelEstimateSeries series;
  for (std::size_t pos = 0; pos + slot_len <= rx.samples.size(); pos += slot_len) {
    double power = 0.0;
    for (std::size_t i = 0; i < slot_len; ++i) power += std::norm(rx.samples[pos + i]);
    series.estimates.emplace_back(std::sqrt(power / static_cast<double>(slot_len)), 0.0);
  }
  return series;
}

ReceiverConfig ReceiverConfig::for_fsk(const FskConfig& fsk, double rate) {
  ReceiverConfig cfg;
  cfg.symbol_samples = static_cast<int>(std::lround(fsk.symbol_duration * rate));
  cfg.bin_f0 = static_cast<int>(std::lround(fsk.f0 * fsk.symbol_duration));
  cfg.bin_f1 = static_cast<int>(std::lround(fsk.f1 * fsk.symbol_duration));
  return cfg;
}

void ReceiverConfig::validate() const {
  if (sync.empty() || sync.size() > 64) {
    throw Error(Errc::config, fmt::format("sync word must have 1..64 bits, got {}", sync.size()));
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(Errc::config, fmt::format("threshold must lie in (0, 1], got {}", threshold));
  }
  if (symbol_samples < 2) throw Error(Errc::config, "symbol_samples must be >= 2");
  if (offset_candidates < 1 || offset_candidates > symbol_samples) {
    throw Error(Errc::config, fmt::format("offset_candidates must lie in 1..{}", symbol_samples));
  }
  auto check_bin = [&](int bin) {
    if (bin <= 0 || 2 * bin >= symbol_samples) {
      throw Error(Errc::aliasing,
                  fmt::format("DFT bin {} is not strictly between DC and Nyquist", bin));
    }
  };
  check_bin(bin_f0);
  check_bin(bin_f1);
  if (bin_f0 == bin_f1) throw Error(Errc::config, "FSK bins must differ");
}

SymbolDetector::SymbolDetector(const ReceiverConfig& cfg)
    : n_(cfg.symbol_samples), tw0_(static_cast<std::size_t>(n_)), tw1_(static_cast<std::size_t>(n_)),
      scratch_(static_cast<std::size_t>(n_)) {
  for (int i = 0; i < n_; ++i) {
    const double w = -2.0 * std::numbers::pi * i / n_;
    tw0_[static_cast<std::size_t>(i)] = std::polar(1.0, w * cfg.bin_f0);
    tw1_[static_cast<std::size_t>(i)] = std::polar(1.0, w * cfg.bin_f1);
  }
}

SymbolDecision SymbolDetector::detect(std::span<const cdouble> window) const {
  for (int i = 0; i < n_; ++i) scratch_[static_cast<std::size_t>(i)] = std::abs(window[static_cast<std::size_t>(i)]);
  return detect_magnitudes(scratch_);
}

SymbolDecision SymbolDetector::detect_magnitudes(std::span<const double> magnitudes) const {
  double mean = 0.0;
  for (int i = 0; i < n_; ++i) mean += magnitudes[static_cast<std::size_t>(i)];
  mean /= n_;
  cdouble x0{}, x1{};
  for (int i = 0; i < n_; ++i) {
    const double v = magnitudes[static_cast<std::size_t>(i)] - mean;
    x0 += v * tw0_[static_cast<std::size_t>(i)];
    x1 += v * tw1_[static_cast<std::size_t>(i)];
  }
  const double e0 = std::norm(x0);
  const double e1 = std::norm(x1);
  const double total = e0 + e1;
  return {static_cast<std::uint8_t>(e1 > e0 ? 1 : 0), total > 0.0 ? std::abs(e0 - e1) / total : 0.0};
}

SymbolDecision detect_symbol(const ChannelEstimateSeries& series, std::size_t window_start,
                             const ReceiverConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.symbol_samples);
  if (window_start + n > series.size()) {
    throw Error(Errc::insufficient_data,
                fmt::format("window [{}, {}) exceeds {} estimates", window_start, window_start + n,
                            series.size()));
  }
  const SymbolDetector detector(cfg);
  return detector.detect(std::span(series.estimates).subspan(window_start, n));
}

std::vector<DecisionStream> demodulate_streams(const ChannelEstimateSeries& series,
                                               const ReceiverConfig& cfg) {
  cfg.validate();
  const SymbolDetector detector(cfg);
  const auto n = static_cast<std::size_t>(cfg.symbol_samples);
  std::vector<DecisionStream> streams(static_cast<std::size_t>(cfg.offset_candidates));
  for (int k = 0; k < cfg.offset_candidates; ++k) {
    auto& stream = streams[static_cast<std::size_t>(k)];
    stream.offset = cfg.candidate_offset(k);
    const auto offset = static_cast<std::size_t>(stream.offset);
    const std::size_t n_bits = series.size() > offset ? (series.size() - offset) / n : 0;
    stream.bits.resize(n_bits);
    stream.confidence.resize(n_bits);
    for (std::size_t j = 0; j < n_bits; ++j) {
      const auto d = detector.detect(std::span(series.estimates).subspan(offset + j * n, n));
      stream.bits[j] = d.bit;
      stream.confidence[j] = d.confidence;
    }
  }
  return streams;
}

std::vector<SyncResult> synchronize(std::span<const DecisionStream> streams,
                                    const ReceiverConfig& cfg, SyncStats* stats) {
  cfg.validate();
  const std::size_t sync_len = cfg.sync.size();
  const std::size_t frame_len = cfg.frame_bits();
  const std::uint64_t mask = sync_len == 64 ? ~0ULL : (1ULL << sync_len) - 1;
  std::uint64_t sync_word = 0;
  for (std::size_t i = 0; i < sync_len; ++i) sync_word = (sync_word << 1) | cfg.sync[i];
  const auto min_agree = static_cast<int>(std::ceil(cfg.threshold * static_cast<double>(sync_len) - 1e-9));

  SyncStats local;
  std::vector<SyncResult> candidates;
  for (std::size_t c = 0; c < streams.size(); ++c) {
    const auto& stream = streams[c];
    const auto& bits = stream.bits;
    if (bits.size() < frame_len) continue;
    std::uint64_t reg = 0;
    for (std::size_t i = 0; i + 1 < sync_len; ++i) reg = (reg << 1) | bits[i];
    for (std::size_t j = 0; j + frame_len <= bits.size(); ++j) {
      reg = ((reg << 1) | bits[j + sync_len - 1]) & mask;
      ++local.windows;
      const int agree = static_cast<int>(sync_len) - std::popcount((reg ^ sync_word) & mask);
      if (agree < min_agree) continue;
      ++local.raw_hits;
      SyncResult r;
      r.frame_start = j;
      r.correlation = static_cast<double>(agree) / static_cast<double>(sync_len);
      r.offset_candidate = static_cast<int>(c);
      r.sample_start = stream.offset + static_cast<long>(j) * cfg.symbol_samples;
      r.data_bits = BitSequence(std::vector<std::uint8_t>(bits.begin() + static_cast<std::ptrdiff_t>(j + sync_len),
                                                          bits.begin() + static_cast<std::ptrdiff_t>(j + frame_len)));
      if (!stream.confidence.empty()) {
        double conf = 0.0;
        for (std::size_t i = j; i < j + frame_len; ++i) conf += stream.confidence[i];
        r.confidence = conf / static_cast<double>(frame_len);
      }
      candidates.push_back(std::move(r));
    }
  }
  if (stats) *stats = local;

  std::sort(candidates.begin(), candidates.end(), [](const SyncResult& a, const SyncResult& b) {
    if (a.correlation != b.correlation) return a.correlation > b.correlation;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.sample_start != b.sample_start) return a.sample_start < b.sample_start;
    return a.offset_candidate < b.offset_candidate;
  });
  // Back-to-back frames sit exactly one frame apart, and timing jitter of
  // a few estimates must not let one suppress the next.
  const long span = static_cast<long>(frame_len) * cfg.symbol_samples - cfg.symbol_samples / 2;
  std::set<long> taken;
  std::vector<SyncResult> accepted;
  for (auto& r : candidates) {
    const auto next = taken.lower_bound(r.sample_start);
    if (next != taken.end() && *next - r.sample_start < span) continue;
    if (next != taken.begin() && r.sample_start - *std::prev(next) < span) continue;
    taken.insert(r.sample_start);
    accepted.push_back(std::move(r));
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const SyncResult& a, const SyncResult& b) { return a.sample_start < b.sample_start; });
  return accepted;
}

double compute_ber(const SyncResult& result, const BitSequence& truth) {
  if (truth.size() != result.data_bits.size()) {
    throw Error(Errc::length_mismatch, fmt::format("payload has {} bits, decoded {}", truth.size(),
                                                   result.data_bits.size()));
  }
  return static_cast<double>(hamming_errors(result.data_bits, truth)) /
         static_cast<double>(truth.size());
}

void write_estimates_csv(std::ostream& out, const ChannelEstimateSeries& series) {
  out << "slot,real,imag,magnitude\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& e = series.estimates[i];
    out << fmt::format("{},{:.9g},{:.9g},{:.9g}\n", series.first_slot + static_cast<long>(i), e.real(),
                       e.imag(), std::abs(e));
  }
}

}  // namespace ambc
