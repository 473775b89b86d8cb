#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ambc/config.hpp"
#include "ambc/receiver.hpp"
#include "ambc/zed.hpp"

namespace ambc {

/// Coordinates of one sweep point. Unset fields fall back to the base config.
struct SweepPoint {
  std::size_t index = 0;
  std::optional<double> snr_db;       // meaningful only when has_snr
  bool has_snr = false;
  std::optional<double> traffic_duty;
  std::optional<double> backscatter_ratio_db;
};

/// Cartesian product of the sweep axes (SNR outermost, ratio innermost).
/// Empty axes contribute a single base-config coordinate.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// Channel and traffic after applying a sweep point to the base config.
/// A traffic duty of 0 or 1 means constant load; anything in between is the
/// bursty on/off chain with the base p_on_to_off.
struct ResolvedPoint {
  ChannelParams channel;
  TrafficModel traffic;
};

ResolvedPoint resolve_point(const ExperimentConfig& cfg, const SweepPoint& point);

/// What the receiver sees during one trial, plus the ground truth.
struct Observation {
  ChannelEstimateSeries crs;
  std::optional<ChannelEstimateSeries> power;  // contrast receiver input
  std::vector<FrameTiming> truth;
  std::size_t expected_wallclock = 0;  // floor(duration / nominal frame period)
};

/// Simulates `cfg.duration_s` seconds in the configured mode. GRID mode is
/// split into fixed slot chunks with their own random streams and spread over
/// cfg.workers threads; the result does not depend on the worker count.
Observation simulate_observation(const ExperimentConfig& cfg, const ResolvedPoint& point,
                                 std::uint64_t seed);

struct FrameRecord {
  int trial = 0;
  std::size_t frame_index = 0;
  double start_s = 0.0;
  bool detected = false;
  double detection_time_s = 0.0;
  double correlation = 0.0;
  double data_ber = 0.0;
  /// Bit errors over the whole frame with genie symbol timing.
  double aligned_ber = 0.0;
  std::optional<double> contrast_aligned_ber;
};

struct FalseAlarm {
  int trial = 0;
  double time_s = 0.0;
  double correlation = 0.0;
  double data_ber = 0.0;
};

struct DetectionReport {
  SweepPoint point;
  ResolvedPoint resolved;
  double observation_s = 0.0;
  std::size_t transmitted_frames = 0;
  std::size_t expected_wallclock_frames = 0;
  std::size_t detected_frames = 0;
  double detection_ratio = 0.0;
  std::optional<double> mean_data_ber;  // over detected frames only
  std::optional<double> ber_p50;
  std::optional<double> ber_p95;
  std::vector<double> ber_sorted;  // detected frames
  double aligned_bit_accuracy = 0.0;
  std::optional<double> contrast_bit_accuracy;
  std::vector<FrameRecord> frames;
  std::vector<FalseAlarm> false_alarms;
  SyncStats sync_stats;

  /// Fills the aggregate fields from `frames`.
  void finalize();
};

/// Detections matched to true frame starts within +-1 symbol; the rest are
/// false alarms.
DetectionReport evaluate_observation(const ExperimentConfig& cfg, const Observation& obs,
                                     int trial, const SweepPoint& point);

/// Validates, then simulates every trial of one point. The point's seed is
/// derived from (cfg.seed, point.index).
DetectionReport run_point(const ExperimentConfig& cfg, const SweepPoint& point);
std::vector<DetectionReport> run_sweep(const ExperimentConfig& cfg);

enum class ReportFormat { csv, summary_text };

/// Writes frames.csv, false_alarms.csv, summary.csv and cdf.csv (csv) or
/// summary.txt (summary_text) into `dir`, creating it if needed. Returns the
/// paths written. Throws Errc::io naming the path on failure.
std::vector<std::filesystem::path> emit_report(const std::vector<DetectionReport>& reports,
                                               const std::filesystem::path& dir,
                                               ReportFormat format);

std::string frames_csv(const std::vector<DetectionReport>& reports);
std::string false_alarms_csv(const std::vector<DetectionReport>& reports);
std::string summary_csv(const std::vector<DetectionReport>& reports);
std::string cdf_csv(const std::vector<DetectionReport>& reports);
std::string summary_text(const std::vector<DetectionReport>& reports);

struct SelftestResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Quick property checks of the library; used by `ambc selftest`.
std::vector<SelftestResult> run_selftest();

}  // namespace ambc
