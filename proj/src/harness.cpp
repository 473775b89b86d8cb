#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ambc/error.hpp"
#include "ambc/harness.hpp"
#include "ambc/stats.hpp"

namespace ambc {

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<std::pair<bool, std::optional<double>>> snrs;
  for (const auto& s : cfg.sweep.snr_db) snrs.emplace_back(true, s);
  if (snrs.empty()) snrs.emplace_back(false, std::nullopt);

  std::vector<std::optional<double>> duties(cfg.sweep.traffic_duty.begin(), cfg.sweep.traffic_duty.end());
  if (duties.empty()) duties.emplace_back();
  std::vector<std::optional<double>> ratios(cfg.sweep.backscatter_ratio_db.begin(),
                                            cfg.sweep.backscatter_ratio_db.end());
  if (ratios.empty()) ratios.emplace_back();

  std::vector<SweepPoint> points;
  for (const auto& [has, snr] : snrs) {
    for (const auto& duty : duties) {
      for (const auto& ratio : ratios) {
        SweepPoint p;
        p.index = points.size();
        p.has_snr = has;
        p.snr_db = snr;
        p.traffic_duty = duty;
        p.backscatter_ratio_db = ratio;
        points.push_back(p);
      }
    }
  }
  return points;
}

ResolvedPoint resolve_point(const ExperimentConfig& cfg, const SweepPoint& point) {
  ChannelConfig ch = cfg.channel;
  if (point.has_snr) ch.snr_db = point.snr_db;
  if (point.backscatter_ratio_db) ch.backscatter_ratio_db = *point.backscatter_ratio_db;
  ResolvedPoint r{ch.params(), cfg.traffic};
  if (point.traffic_duty) {
    const double d = *point.traffic_duty;
    r.traffic = (d <= 0.0 || d >= 1.0) ? TrafficModel::constant(std::clamp(d, 0.0, 1.0))
                                       : TrafficModel::bursty(d, cfg.traffic.p_on_to_off);
    r.traffic.data_re_power = cfg.traffic.data_re_power;
  }
  r.channel.validate();
  r.traffic.validate();
  return r;
}

namespace {

/// Fraction of frame bits wrong when the detector windows sit on the true
/// symbol grid. nullopt when the frame runs past the series.
std::optional<double> aligned_ber(const ChannelEstimateSeries& series, const SymbolDetector& detector,
                                  const ReceiverConfig& rc, const BitSequence& frame, double start_s,
                                  double symbol_s, bool magnitudes) {
  const auto n = static_cast<std::size_t>(rc.symbol_samples);
  std::vector<double> mags(n);
  std::size_t errors = 0;
  for (std::size_t j = 0; j < frame.size(); ++j) {
    const double t = start_s + static_cast<double>(j) * symbol_s;
    const long first = std::lround(t * series.rate) - series.first_slot;
    if (first < 0 || static_cast<std::size_t>(first) + n > series.size()) return std::nullopt;
    const auto window = std::span(series.estimates).subspan(static_cast<std::size_t>(first), n);
    SymbolDecision d;
    if (magnitudes) {
      for (std::size_t i = 0; i < n; ++i) mags[i] = window[i].real();
      d = detector.detect_magnitudes(mags);
    } else {
      d = detector.detect(window);
    }
    errors += d.bit != frame[j];
  }
  return static_cast<double>(errors) / static_cast<double>(frame.size());
}

}  // namespace

void DetectionReport::finalize() {
  transmitted_frames = frames.size();
  detected_frames = 0;
  ber_sorted.clear();
  double aligned = 0.0;
  double contrast = 0.0;
  std::size_t contrast_n = 0;
  for (const auto& f : frames) {
    aligned += f.aligned_ber;
    if (f.contrast_aligned_ber) {
      contrast += *f.contrast_aligned_ber;
      ++contrast_n;
    }
    if (!f.detected) continue;
    ++detected_frames;
    ber_sorted.push_back(f.data_ber);
  }
  std::sort(ber_sorted.begin(), ber_sorted.end());
  detection_ratio = transmitted_frames ? static_cast<double>(detected_frames) / transmitted_frames : 0.0;
  aligned_bit_accuracy = transmitted_frames ? 1.0 - aligned / transmitted_frames : 0.0;
  contrast_bit_accuracy.reset();
  if (contrast_n) contrast_bit_accuracy = 1.0 - contrast / contrast_n;
  mean_data_ber.reset();
  ber_p50.reset();
  ber_p95.reset();
  if (!ber_sorted.empty()) {
    mean_data_ber = std::accumulate(ber_sorted.begin(), ber_sorted.end(), 0.0) / ber_sorted.size();
    ber_p50 = empirical_quantile(ber_sorted, 0.5);
    ber_p95 = empirical_quantile(ber_sorted, 0.95);
  }
}

DetectionReport evaluate_observation(const ExperimentConfig& cfg, const Observation& obs, int trial,
                                     const SweepPoint& point) {
  const ReceiverConfig rc = cfg.receiver_config();
  const BitSequence frame = cfg.frame();
  const BitSequence& payload = cfg.zed.payload;
  const SymbolDetector detector(rc);

  DetectionReport report;
  report.point = point;
  report.observation_s = cfg.duration_s;
  report.expected_wallclock_frames = obs.expected_wallclock;

  const auto streams = demodulate_streams(obs.crs, rc);
  const auto detections = synchronize(streams, rc, &report.sync_stats);

  const double symbol_s =
      obs.truth.empty() ? cfg.fsk.symbol_duration
                        : cfg.fsk.symbol_duration / (1.0 + cfg.zed.clock_skew_ppm * 1e-6);
  for (const auto& t : obs.truth) {
    FrameRecord rec;
    rec.trial = trial;
    rec.frame_index = t.index;
    rec.start_s = t.start;
    rec.aligned_ber = aligned_ber(obs.crs, detector, rc, frame, t.start, symbol_s, false).value_or(1.0);
    if (obs.power) {
      rec.contrast_aligned_ber = aligned_ber(*obs.power, detector, rc, frame, t.start, symbol_s, true).value_or(1.0);
    }
    report.frames.push_back(rec);
  }

  const double tolerance = symbol_s + 1e-9;
  for (const auto& d : detections) {
    const double time = static_cast<double>(d.sample_start + obs.crs.first_slot) / obs.crs.rate;
    FrameRecord* best = nullptr;
    for (auto& rec : report.frames) {
      if (rec.detected || std::abs(rec.start_s - time) > tolerance) continue;
      if (!best || std::abs(rec.start_s - time) < std::abs(best->start_s - time)) best = &rec;
    }
    const double ber = compute_ber(d, payload);
    if (best) {
      best->detected = true;
      best->detection_time_s = time;
      best->correlation = d.correlation;
      best->data_ber = ber;
    } else {
      report.false_alarms.push_back({trial, time, d.correlation, ber});
    }
  }
  report.finalize();
  return report;
}

DetectionReport run_point(const ExperimentConfig& cfg, const SweepPoint& point) {
  cfg.validate();
  if (cfg.trials < 1) throw Error(Errc::config, "trials must be >= 1");
  const ResolvedPoint resolved = resolve_point(cfg, point);
  const std::uint64_t point_seed = derive_seed(cfg.seed, Stream::point, point.index);

  DetectionReport total;
  total.point = point;
  total.resolved = resolved;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t seed = derive_seed(point_seed, Stream::trial, static_cast<std::uint64_t>(trial));
    auto part = evaluate_observation(cfg, simulate_observation(cfg, resolved, seed), trial, point);
    total.observation_s += part.observation_s;
    total.expected_wallclock_frames += part.expected_wallclock_frames;
    total.sync_stats.windows += part.sync_stats.windows;
    total.sync_stats.raw_hits += part.sync_stats.raw_hits;
    std::move(part.frames.begin(), part.frames.end(), std::back_inserter(total.frames));
    std::move(part.false_alarms.begin(), part.false_alarms.end(), std::back_inserter(total.false_alarms));
  }
  total.finalize();
  return total;
}

std::vector<DetectionReport> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  for (const auto& p : points) resolve_point(cfg, p);
  std::vector<DetectionReport> reports;
  reports.reserve(points.size());
  for (const auto& p : points) reports.push_back(run_point(cfg, p));
  return reports;
}

}  // namespace ambc
