#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ambc/error.hpp"
#include "ambc/harness.hpp"
#include "ambc/stats.hpp"

namespace ambc {

namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string traffic_label(const TrafficModel& t) {
  return t.kind == TrafficKind::constant_load ? "constant" : "bursty";
}

void require_reports(const std::vector<DetectionReport>& reports) {
  if (reports.empty()) throw Error(Errc::invalid_argument, "no reports to emit");
}

}  // namespace

std::string frames_csv(const std::vector<DetectionReport>& reports) {
  std::string out =
      "point,trial,frame_index,start_s,detected,detection_time_s,correlation,data_ber,aligned_ber,"
      "contrast_aligned_ber\n";
  for (const auto& r : reports) {
    for (const auto& f : r.frames) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.point.index, f.trial, f.frame_index,
                         num(f.start_s), f.detected ? 1 : 0, f.detected ? num(f.detection_time_s) : "",
                         f.detected ? num(f.correlation) : "", f.detected ? num(f.data_ber) : "",
                         num(f.aligned_ber), opt(f.contrast_aligned_ber));
    }
  }
  return out;
}

std::string false_alarms_csv(const std::vector<DetectionReport>& reports) {
  std::string out = "point,trial,time_s,correlation,data_ber\n";
  for (const auto& r : reports) {
    for (const auto& a : r.false_alarms) {
      out += fmt::format("{},{},{},{},{}\n", r.point.index, a.trial, num(a.time_s), num(a.correlation),
                         num(a.data_ber));
    }
  }
  return out;
}

std::string summary_csv(const std::vector<DetectionReport>& reports) {
  std::string out =
      "point,snr_db,traffic,traffic_duty,backscatter_ratio_db,observation_s,transmitted,"
      "expected_wallclock,detected,detection_ratio,mean_data_ber,ber_p50,ber_p95,false_alarms,"
      "sync_windows,aligned_bit_accuracy,contrast_bit_accuracy\n";
  for (const auto& r : reports) {
    const auto& ch = r.resolved.channel;
    const double ratio = ch.backscatter_ratio_db();
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.point.index,
                       opt(ch.target_snr_db), traffic_label(r.resolved.traffic),
                       num(r.resolved.traffic.stationary_duty()), std::isfinite(ratio) ? num(ratio) : "",
                       num(r.observation_s), r.transmitted_frames, r.expected_wallclock_frames,
                       r.detected_frames, num(r.detection_ratio), opt(r.mean_data_ber), opt(r.ber_p50),
                       opt(r.ber_p95), r.false_alarms.size(), r.sync_stats.windows,
                       num(r.aligned_bit_accuracy), opt(r.contrast_bit_accuracy));
  }
  return out;
}

std::string cdf_csv(const std::vector<DetectionReport>& reports) {
  std::string out = "point,ber,probability\n";
  for (const auto& r : reports) {
    for (const auto& p : empirical_cdf(r.ber_sorted)) {
      out += fmt::format("{},{},{}\n", r.point.index, num(p.value), num(p.probability));
    }
  }
  return out;
}

std::string summary_text(const std::vector<DetectionReport>& reports) {
  std::string out;
  auto row = [&](const std::string& label, auto&& cell) {
    out += fmt::format("{:<28}", label);
    for (const auto& r : reports) out += fmt::format("{:>16}", cell(r));
    out += '\n';
  };
  row("Point", [](const DetectionReport& r) { return fmt::format("{}", r.point.index); });
  row("Average SNR (dB)", [](const DetectionReport& r) {
    const auto& s = r.resolved.channel.target_snr_db;
    return s ? fmt::format("{:.1f}", *s) : std::string("noiseless");
  });
  row("Backscatter ratio (dB)", [](const DetectionReport& r) {
    const double v = r.resolved.channel.backscatter_ratio_db();
    return std::isfinite(v) ? fmt::format("{:.1f}", v) : std::string("none");
  });
  row("Traffic duty", [](const DetectionReport& r) {
    return fmt::format("{:.2f} {}", r.resolved.traffic.stationary_duty(), traffic_label(r.resolved.traffic));
  });
  row("Observation time (s)", [](const DetectionReport& r) { return fmt::format("{:.1f}", r.observation_s); });
  row("Transmitted frames", [](const DetectionReport& r) { return fmt::format("{}", r.transmitted_frames); });
  row("Expected frames (clock)",
      [](const DetectionReport& r) { return fmt::format("{}", r.expected_wallclock_frames); });
  row("Detected frames", [](const DetectionReport& r) { return fmt::format("{}", r.detected_frames); });
  row("Detection ratio (%)",
      [](const DetectionReport& r) { return fmt::format("{:.2f}", 100.0 * r.detection_ratio); });
  row("Average data BER", [](const DetectionReport& r) {
    return r.mean_data_ber ? fmt::format("{:.4f}", *r.mean_data_ber) : std::string("-");
  });
  row("Data BER p95", [](const DetectionReport& r) {
    return r.ber_p95 ? fmt::format("{:.4f}", *r.ber_p95) : std::string("-");
  });
  row("False alarms", [](const DetectionReport& r) { return fmt::format("{}", r.false_alarms.size()); });
  return out;
}

std::vector<std::filesystem::path> emit_report(const std::vector<DetectionReport>& reports,
                                               const std::filesystem::path& dir, ReportFormat format) {
  require_reports(reports);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  std::vector<std::pair<std::string, std::string>> files;
  if (format == ReportFormat::csv) {
    files = {{"frames.csv", frames_csv(reports)},
             {"false_alarms.csv", false_alarms_csv(reports)},
             {"summary.csv", summary_csv(reports)},
             {"cdf.csv", cdf_csv(reports)}};
  } else {
    files = {{"summary.txt", summary_text(reports)}};
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw Error(Errc::io, fmt::format("cannot write {}", path.string()));
    written.push_back(path);
  }
  return written;
}

}  // namespace ambc
