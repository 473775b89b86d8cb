#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ambc/error.hpp"
#include "ambc/harness.hpp"
#include "ambc/receiver.hpp"
#include "oracle.hpp"

using namespace ambc;

namespace {

/// Noiseless per-slot estimates of a tag sending `frame` from t = 0 on a
/// channel with unit direct path.
ChannelEstimateSeries clean_series(const BitSequence& frame, double gain, std::size_t lead = 0) {
  const FskConfig fsk;
  const auto w = modulate_frame(frame, fsk, 2000.0);
  ChannelEstimateSeries s;
  s.estimates.assign(lead, cdouble{1.0, 0.0});
  for (double v : w.states) s.estimates.emplace_back(1.0 + gain * v, 0.0);
  s.estimates.resize(s.estimates.size() + 200, cdouble{1.0, 0.0});
  return s;
}

DecisionStream stream_of(const BitSequence& bits) {
  DecisionStream s;
  s.bits.assign(bits.bits().begin(), bits.bits().end());
  return s;
}

BitSequence with_errors(const BitSequence& frame, std::size_t n_errors, std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits(frame.bits().begin(), frame.bits().end());
  std::vector<std::size_t> pos(kSyncBits);
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  for (std::size_t i = 0; i < n_errors; ++i) bits[pos[i]] ^= 1u;
  return BitSequence(bits);
}

}  // namespace

TEST_CASE("receiver numerology follows the FSK tones") {
  const auto rc = ReceiverConfig::for_fsk(FskConfig{});
  CHECK(rc.symbol_samples == 80);
  CHECK(rc.bin_f0 == 5);
  CHECK(rc.bin_f1 == 20);
  CHECK(rc.candidate_offset(1) == 10);
  CHECK(rc.candidate_offset(7) == 70);
  CHECK_NOTHROW(rc.validate());

  ReceiverConfig bad = rc;
  bad.bin_f1 = 40;
  try {
    bad.validate();
    FAIL("Nyquist bin accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::aliasing);
  }
  bad = rc;
  bad.threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = rc;
  bad.offset_candidates = 81;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("energy detector decides clean symbols") {
  const ReceiverConfig rc;
  const auto series = clean_series(BitSequence::from_string("0110"), 0.1);
  for (std::size_t b = 0; b < 4; ++b) {
    const auto d = detect_symbol(series, b * 80, rc);
    CHECK(d.bit == (b == 1 || b == 2 ? 1 : 0));
    CHECK(d.confidence == doctest::Approx(1.0));
  }
  const SymbolDetector detector(rc);
  const std::vector<double> flat(80, 2.5);
  const auto tie = detector.detect_magnitudes(flat);
  CHECK(tie.bit == 0);
  CHECK(tie.confidence == 0.0);
  CHECK_THROWS_AS(detect_symbol(series, series.size() - 79, rc), Error);
}

TEST_CASE("detector ignores a constant magnitude offset") {
  const ReceiverConfig rc;
  const SymbolDetector detector(rc);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  const auto series = clean_series(build_frame(default_payload()), 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> mags(80);
    const std::size_t start = static_cast<std::size_t>(trial) * 37 % (series.size() - 80);
    for (std::size_t i = 0; i < 80; ++i) mags[i] = std::abs(series.estimates[start + i]) + noise(rng);
    const auto base = detector.detect_magnitudes(mags);
    for (double dc : {-0.75, 0.001, 3.0, 250.0}) {
      std::vector<double> shifted = mags;
      for (auto& m : shifted) m += dc;
      CHECK(detector.detect_magnitudes(shifted).bit == base.bit);
    }
  }
}

TEST_CASE("streams at every timing hypothesis") {
  const auto frame = build_frame(default_payload());
  const auto series = clean_series(frame, 0.2);
  const ReceiverConfig rc;
  const auto streams = demodulate_streams(series, rc);
  REQUIRE(streams.size() == 8);
  CHECK(streams[0].offset == 0);
  CHECK(streams[3].offset == 30);
  std::vector<std::uint8_t> expected(frame.bits().begin(), frame.bits().end());
  CHECK(std::equal(expected.begin(), expected.end(), streams[0].bits.begin()));
  CHECK(streams[0].bits.size() == (series.size()) / 80);
  CHECK(streams[7].bits.size() == (series.size() - 70) / 80);
}

TEST_CASE("clean frame is found once with correlation 1") {
  const auto frame = build_frame(default_payload());
  const auto series = clean_series(frame, 0.2, 400);
  const ReceiverConfig rc;
  SyncStats stats;
  const auto found = synchronize(demodulate_streams(series, rc), rc, &stats);
  REQUIRE(found.size() == 1);
  CHECK(found[0].correlation == 1.0);
  CHECK(found[0].sample_start == 400);
  CHECK(compute_ber(found[0], default_payload()) == 0.0);
  CHECK(stats.windows > 0);
  CHECK(stats.raw_hits >= 1);
}

TEST_CASE("a frame is emitted exactly when its sync word has at most 12 errors") {
  std::mt19937_64 rng(11);
  const auto frame = build_frame(default_payload());
  ReceiverConfig rc;
  rc.offset_candidates = 1;
  for (std::size_t e = 0; e <= 20; ++e) {
    for (int rep = 0; rep < 10; ++rep) {
      const DecisionStream streams[] = {stream_of(with_errors(frame, e, rng))};
      const auto found = synchronize(streams, rc);
      CHECK(found.size() == (e <= 12 ? 1u : 0u));
      if (!found.empty()) {
        CHECK(found[0].correlation == doctest::Approx((63.0 - e) / 63.0));
        CHECK(compute_ber(found[0], default_payload()) == 0.0);
      }
    }
  }
}

TEST_CASE("back-to-back frames are both kept") {
  const auto frame = build_frame(default_payload());
  ReceiverConfig rc;
  rc.offset_candidates = 1;
  const DecisionStream streams[] = {stream_of(frame.concat(frame).concat(frame))};
  CHECK(synchronize(streams, rc).size() == 3);
}

TEST_CASE("overlapping candidates keep the best correlation") {
  const auto frame = build_frame(default_payload());
  std::mt19937_64 rng(5);
  DecisionStream a = stream_of(BitSequence::from_string(std::string(3, '0')).concat(with_errors(frame, 10, rng)));
  DecisionStream b = stream_of(with_errors(frame, 4, rng));
  a.offset = 0;
  b.offset = 40;
  ReceiverConfig rc;
  rc.offset_candidates = 2;
  const DecisionStream streams[] = {a, b};
  const auto found = synchronize(streams, rc);
  REQUIRE(found.size() == 1);
  CHECK(found[0].offset_candidate == 1);
  CHECK(found[0].correlation == doctest::Approx(59.0 / 63.0));
}

TEST_CASE("random decisions cross the threshold at the binomial rate") {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution coin(0.5);

  SUBCASE("one long stream at the default threshold") {
    DecisionStream s;
    s.bits.resize(1'000'000);
    for (auto& b : s.bits) b = coin(rng);
    ReceiverConfig rc;
    rc.offset_candidates = 1;
    SyncStats stats;
    const DecisionStream streams[] = {s};
    synchronize(streams, rc, &stats);
    CHECK(stats.windows == 1'000'000 - 119);
    const double mean = static_cast<double>(stats.windows) * static_cast<double>(oracle::window_hit_probability(63, 12));
    CHECK(std::abs(static_cast<double>(stats.raw_hits) - mean) <= 3.0 * std::sqrt(mean) + 1e-9);
  }

  SUBCASE("independent windows at a low threshold") {
    ReceiverConfig rc;
    rc.offset_candidates = 1;
    rc.threshold = 0.6;
    std::vector<DecisionStream> streams(8333);
    for (auto& s : streams) {
      s.bits.resize(120);
      for (auto& b : s.bits) b = coin(rng);
    }
    SyncStats stats;
    synchronize(streams, rc, &stats);
    CHECK(stats.windows == 8333);
    const double p = static_cast<double>(oracle::window_hit_probability(63, 25));
    const double mean = 8333 * p;
    const double sigma = std::sqrt(8333 * p * (1 - p));
    CHECK(std::abs(static_cast<double>(stats.raw_hits) - mean) <= 3.0 * sigma);
  }
}

TEST_CASE("per-slot LS estimate averages the noise over 200 pilots") {
  for (auto mode : {GridNoise::per_re, GridNoise::slot_aggregate}) {
    ExperimentConfig cfg;
    cfg.duration_s = 5.0;
    cfg.zed.enabled = false;
    cfg.channel.snr_db = 0.0;
    cfg.channel.h_direct = std::polar(1.3, -0.7);
    cfg.grid_noise = mode;
    const auto obs = simulate_observation(cfg, resolve_point(cfg, {}), 12);
    REQUIRE(obs.crs.size() == 10000);
    double var = 0.0;
    for (const auto& e : obs.crs.estimates) var += std::norm(e - cfg.channel.h_direct);
    var /= 10000.0;
    const double expected = std::norm(cfg.channel.h_direct) / 200.0;
    CHECK(var == doctest::Approx(expected).epsilon(0.1));
  }
}

TEST_CASE("grid estimator on a noiseless grid returns the path gain") {
  const GridConfig g;
  const CrsConfig crs;
  const auto tx = build_grid(g, crs, TrafficModel::constant(1.0), 0.005, 1);
  ChannelParams p;
  p.h_direct = {0.3, -0.9};
  p.target_snr_db.reset();
  const auto rx = apply_channel(tx, g, crs, [](double) { return 0.0; }, p, 1);
  const auto est = estimate_channel(rx, crs);
  REQUIRE(est.size() == 10);
  for (const auto& e : est.estimates) CHECK(std::abs(e - p.h_direct) < 1e-14);

  const auto via_time = estimate_channel(apply_channel(synthesize_baseband(tx, g), g, crs,
                                                       [](double) { return 0.0; }, p, 1),
                                         g, crs);
  for (const auto& e : via_time.estimates) CHECK(std::abs(e - p.h_direct) < 1e-12);

  CHECK_THROWS_AS(estimate_channel(ResourceGrid(600, 6), crs), Error);
}

TEST_CASE("bit error rate of the payload") {
  SyncResult r;
  r.data_bits = BitSequence::from_string("0101");
  CHECK(compute_ber(r, BitSequence::from_string("0101")) == 0.0);
  CHECK(compute_ber(r, BitSequence::from_string("0110")) == 0.5);
  CHECK(compute_ber(r, BitSequence::from_string("1010")) == 1.0);
  try {
    compute_ber(r, BitSequence::from_string("010"));
    FAIL("length mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
}

TEST_CASE("estimate CSV") {
  ChannelEstimateSeries s;
  s.first_slot = 4;
  s.estimates = {{3.0, 4.0}};
  std::ostringstream out;
  write_estimates_csv(out, s);
  CHECK(out.str() == "slot,real,imag,magnitude\n4,3,4,5\n");
}
