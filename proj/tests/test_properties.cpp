#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "ambc/channel.hpp"
#include "ambc/harness.hpp"
#include "ambc/receiver.hpp"
#include "ambc/stats.hpp"

using namespace ambc;

namespace {

BitSequence random_bits(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = coin(rng);
  return BitSequence(bits);
}

}  // namespace

TEST_CASE("correlation and Hamming distance are complementary and symmetric") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + trial % 90;
    const auto a = random_bits(rng, n);
    const auto b = random_bits(rng, n);
    const double c = agreement_correlation(a, b);
    CHECK(c == agreement_correlation(b, a));
    CHECK(c * static_cast<double>(n) + static_cast<double>(hamming_errors(a, b)) ==
          doctest::Approx(static_cast<double>(n)));
    CHECK(agreement_correlation(a, a.complement()) == 0.0);
    CHECK(hamming_errors(a.rotated(trial % n), b.rotated(trial % n)) == hamming_errors(a, b));
  }
}

TEST_CASE("synchronizer output is ordered, separated and above threshold") {
  std::mt19937_64 rng(2);
  const auto frame = build_frame(default_payload());
  for (int trial = 0; trial < 40; ++trial) {
    ReceiverConfig rc;
    rc.offset_candidates = 1 + trial % 8;
    rc.threshold = 0.6 + 0.01 * (trial % 20);
    std::vector<DecisionStream> streams(static_cast<std::size_t>(rc.offset_candidates));
    for (int k = 0; k < rc.offset_candidates; ++k) {
      auto bits = random_bits(rng, 600);
      if (k == 0) bits = bits.concat(frame).concat(random_bits(rng, 300));
      streams[static_cast<std::size_t>(k)].offset = rc.candidate_offset(k);
      streams[static_cast<std::size_t>(k)].bits.assign(bits.bits().begin(), bits.bits().end());
    }
    SyncStats stats;
    const auto found = synchronize(streams, rc, &stats);
    CHECK(found.size() <= stats.raw_hits);
    CHECK_FALSE(found.empty());
    const long span = static_cast<long>(kFrameBits) * rc.symbol_samples - rc.symbol_samples / 2;
    for (std::size_t i = 0; i < found.size(); ++i) {
      CHECK(found[i].correlation >= rc.threshold - 1e-12);
      CHECK(found[i].data_bits.size() == kDataBits);
      if (i) CHECK(found[i].sample_start - found[i - 1].sample_start >= span);
    }
  }
}

TEST_CASE("noiseless channel is linear for random scalars and tag waveforms") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const GridConfig g;
  const CrsConfig crs;
  for (int trial = 0; trial < 5; ++trial) {
    const auto tx = build_grid(g, crs, TrafficModel::bursty(0.5), 0.002, rng());
    ResourceGrid scaled = tx;
    const cdouble a{n01(rng), n01(rng)};
    for (auto& v : scaled.cells()) v *= a;
    auto p = ChannelParams::from_ratio(-40.0 * std::uniform_real_distribution<double>()(rng), n01(rng));
    p.target_snr_db.reset();
    const double f = 100.0 + 400.0 * std::uniform_real_distribution<double>()(rng);
    const auto s = [f](double t) { return std::fmod(t * f, 1.0) < 0.5 ? 1.0 : 0.0; };
    const auto r1 = apply_channel(tx, g, crs, s, p, 1);
    const auto r2 = apply_channel(scaled, g, crs, s, p, 1);
    double err = 0.0;
    for (std::size_t i = 0; i < tx.cells().size(); ++i) err = std::max(err, std::abs(r2.cells()[i] - a * r1.cells()[i]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("empirical CDF of random samples is monotone and ends at one") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> k(0, 57);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial);
    for (auto& x : v) x = k(rng) / 57.0;
    const auto cdf = empirical_cdf(v);
    REQUIRE_FALSE(cdf.empty());
    CHECK(cdf.back().probability == 1.0);
    for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i].probability > cdf[i - 1].probability);
    CHECK(empirical_quantile(v, 0.95) >= empirical_quantile(v, 0.5));
  }
}

TEST_CASE("frame accounting holds at every operating point") {
  for (double snr : {-6.0, -2.0, 2.0}) {
    ExperimentConfig cfg;
    cfg.duration_s = 100.0;
    cfg.channel.snr_db = snr;
    cfg.channel.backscatter_ratio_db = -25.0;
    const auto r = run_point(cfg, {});
    std::size_t detected = 0, missed = 0;
    for (const auto& f : r.frames) (f.detected ? detected : missed)++;
    CHECK(detected == r.detected_frames);
    CHECK(detected + missed == r.transmitted_frames);
    CHECK(r.transmitted_frames == 20);
    CHECK(r.detection_ratio >= 0.0);
    CHECK(r.detection_ratio <= 1.0);
    for (const auto& a : r.false_alarms) {
      for (const auto& f : r.frames) {
        if (f.detected) CHECK(f.detection_time_s != a.time_s);
      }
    }
  }
}

TEST_CASE("detection improves and BER falls with SNR") {
  const std::vector<double> snrs{-10, -5, 0, 4, 10, 20};
  ExperimentConfig cfg;
  cfg.duration_s = 960.0;
  cfg.trials = 2;
  cfg.channel.backscatter_ratio_db = -32.4;
  cfg.receiver.offset_candidates = 4;
  cfg.sweep.snr_db.assign(snrs.begin(), snrs.end());
  const auto reports = run_sweep(cfg);
  REQUIRE(reports.size() == snrs.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    MESSAGE(fmt::format("snr {:>5} dB: detected {:>3}/{} mean BER {}", snrs[i], r.detected_frames,
                        r.transmitted_frames, r.mean_data_ber ? fmt::format("{:.4f}", *r.mean_data_ber) : "-"));
    CHECK(r.transmitted_frames == 400);
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    CHECK(reports[i].detection_ratio >= reports[i - 1].detection_ratio - 0.02);
    if (reports[i].mean_data_ber && reports[i - 1].mean_data_ber) {
      CHECK(*reports[i].mean_data_ber <= *reports[i - 1].mean_data_ber + 0.02);
    }
  }
  CHECK(reports.back().detection_ratio > reports.front().detection_ratio);
}

TEST_CASE("CRS receiver is blind to traffic, the power receiver is not") {
  ExperimentConfig cfg;
  cfg.duration_s = 1008.0;
  cfg.channel.snr_db = 0.0;
  cfg.channel.backscatter_ratio_db = -25.0;
  cfg.contrast_receiver = true;
  cfg.seed = 31;
  cfg.sweep.traffic_duty = {0.0, 0.5, 1.0};
  const auto reports = run_sweep(cfg);
  REQUIRE(reports.size() == 3);
  std::vector<std::vector<double>> ber(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& f : reports[i].frames) ber[i].push_back(f.aligned_ber);
    CHECK(ber[i].size() >= 200);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto ks = ks_two_sample(ber[i], ber[j]);
      MESSAGE(fmt::format("duty pair {}/{}: D {:.4f} p {:.4f}", i, j, ks.statistic, ks.p_value));
      CHECK(ks.p_value >= 0.01);
    }
  }
  const double steady = std::min(*reports[0].contrast_bit_accuracy, *reports[2].contrast_bit_accuracy);
  MESSAGE(fmt::format("power receiver accuracy: idle {:.4f} bursty {:.4f} full {:.4f}",
                      *reports[0].contrast_bit_accuracy, *reports[1].contrast_bit_accuracy,
                      *reports[2].contrast_bit_accuracy));
  CHECK(steady - *reports[1].contrast_bit_accuracy >= 0.10);
}
