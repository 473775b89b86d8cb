#include <cmath>

#include <fmt/format.h>

#include "ambc/harness.hpp"

namespace ambc {

namespace {

SelftestResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

SelftestResult frame_length() {
  const ExperimentConfig cfg;
  const auto bits = cfg.frame().size();
  const double seconds = cfg.fsk.frame_duration(bits);
  return check("frame_length", bits == kFrameBits && std::abs(seconds - 4.8) < 1e-12,
               fmt::format("{} bits, {:.3f} s", bits, seconds));
}

SelftestResult threshold_rule() {
  const auto sync = default_sync();
  ReceiverConfig rc;
  int mismatches = 0;
  for (std::size_t e = 0; e <= sync.size(); ++e) {
    std::vector<std::uint8_t> bits(sync.bits().begin(), sync.bits().end());
    for (std::size_t i = 0; i < e; ++i) bits[i] ^= 1u;
    DecisionStream s;
    s.bits = bits;
    s.bits.resize(rc.frame_bits(), 0);
    const DecisionStream streams[] = {s};
    rc.offset_candidates = 1;
    const bool hit = !synchronize(streams, rc).empty();
    mismatches += hit != (e <= 12);
  }
  return check("threshold_rule", mismatches == 0,
               fmt::format("{} error counts disagree with the 12-error rule", mismatches));
}

SelftestResult m_sequence() {
  const auto seq = default_sync();
  bool autocorr_ok = true;
  for (std::size_t lag = 1; lag < seq.size(); ++lag) {
    autocorr_ok &= hamming_errors(seq, seq.rotated(lag)) == 32;
  }
  return check("m_sequence", seq.size() == 63 && seq.count_ones() == 32 && autocorr_ok,
               fmt::format("period {}, {} ones", seq.size(), seq.count_ones()));
}

SelftestResult noiseless_link() {
  ExperimentConfig cfg;
  cfg.duration_s = 9.6;
  cfg.channel.snr_db.reset();
  const auto r = run_point(cfg, {});
  const bool ok = r.transmitted_frames == 2 && r.detected_frames == 2 && r.mean_data_ber == 0.0 &&
                  r.false_alarms.empty();
  return check("noiseless_link", ok,
               fmt::format("{}/{} frames detected", r.detected_frames, r.transmitted_frames));
}

SelftestResult determinism() {
  ExperimentConfig cfg;
  cfg.duration_s = 9.6;
  cfg.channel.snr_db = 0.0;
  const auto a = frames_csv({run_point(cfg, {})});
  cfg.workers = 2;
  const auto b = frames_csv({run_point(cfg, {})});
  return check("determinism", a == b, a == b ? "identical frame records" : "frame records differ");
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  std::vector<SelftestResult> results;
  for (auto* test : {frame_length, threshold_rule, m_sequence, noiseless_link, determinism}) {
    try {
      results.push_back(test());
    } catch (const std::exception& e) {
      results.push_back({"exception", false, e.what()});
    }
  }
  return results;
}

}  // namespace ambc
