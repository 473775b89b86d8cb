#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "ambc/bitseq.hpp"
#include "ambc/channel.hpp"
#include "ambc/config.hpp"
#include "ambc/error.hpp"
#include "ambc/harness.hpp"
#include "ambc/receiver.hpp"

namespace py = pybind11;

namespace {

ambc::ExperimentConfig parse_config(const std::string& text) {
  return text.empty() ? ambc::ExperimentConfig{} : ambc::config_from_json(nlohmann::json::parse(text));
}

std::vector<std::uint8_t> to_bits(const ambc::BitSequence& s) { return {s.bits().begin(), s.bits().end()}; }

py::dict report_to_dict(const ambc::DetectionReport& r) {
  py::dict d;
  d["point"] = r.point.index;
  d["snr_db"] = r.resolved.channel.target_snr_db;
  d["backscatter_ratio_db"] = r.resolved.channel.backscatter_ratio_db();
  d["traffic_duty"] = r.resolved.traffic.stationary_duty();
  d["observation_s"] = r.observation_s;
  d["transmitted_frames"] = r.transmitted_frames;
  d["expected_wallclock_frames"] = r.expected_wallclock_frames;
  d["detected_frames"] = r.detected_frames;
  d["detection_ratio"] = r.detection_ratio;
  d["mean_data_ber"] = r.mean_data_ber;
  d["ber_p50"] = r.ber_p50;
  d["ber_p95"] = r.ber_p95;
  d["ber_sorted"] = r.ber_sorted;
  d["false_alarms"] = r.false_alarms.size();
  d["sync_windows"] = r.sync_stats.windows;
  d["aligned_bit_accuracy"] = r.aligned_bit_accuracy;
  d["contrast_bit_accuracy"] = r.contrast_bit_accuracy;
  py::list frames;
  for (const auto& f : r.frames) {
    py::dict fd;
    fd["trial"] = f.trial;
    fd["frame_index"] = f.frame_index;
    fd["start_s"] = f.start_s;
    fd["detected"] = f.detected;
    fd["detection_time_s"] = f.detection_time_s;
    fd["correlation"] = f.correlation;
    fd["data_ber"] = f.data_ber;
    fd["aligned_ber"] = f.aligned_ber;
    frames.append(fd);
  }
  d["frames"] = frames;
  return d;
}

ambc::SweepPoint make_point(std::optional<double> snr_db, bool noiseless, std::optional<double> ratio,
                            std::optional<double> duty) {
  ambc::SweepPoint p;
  p.has_snr = noiseless || snr_db.has_value();
  if (!noiseless) p.snr_db = snr_db;
  p.backscatter_ratio_db = ratio;
  p.traffic_duty = duty;
  return p;
}

}  // namespace

PYBIND11_MODULE(_ambc, m) {
  m.doc() = "Pilot-based ambient backscatter over LTE: simulator core";

  py::register_exception<ambc::Error>(m, "AmbcError", PyExc_ValueError);

  m.attr("SYNC_BITS") = ambc::kSyncBits;
  m.attr("DATA_BITS") = ambc::kDataBits;
  m.attr("FRAME_BITS") = ambc::kFrameBits;

  m.def(
      "m_sequence",
      [](int degree, std::vector<int> taps, const std::string& seed) {
        ambc::LfsrSpec spec;
        spec.degree = degree;
        spec.taps = std::move(taps);
        spec.seed = ambc::LfsrSpec::seed_from_string(seed);
        return to_bits(ambc::generate_m_sequence(spec));
      },
      "One period of the Fibonacci LFSR sequence.", py::arg("degree") = 6,
      py::arg("taps") = std::vector<int>{6, 5}, py::arg("seed") = "111111");
  m.def("default_sync", [] { return to_bits(ambc::default_sync()); });
  m.def("default_payload", [] { return to_bits(ambc::default_payload()); });
  m.def(
      "build_frame", [](std::vector<std::uint8_t> data) { return to_bits(ambc::build_frame(ambc::BitSequence(data))); },
      py::arg("data"));
  m.def(
      "correlation",
      [](std::vector<std::uint8_t> a, std::vector<std::uint8_t> b) {
        return ambc::agreement_correlation(ambc::BitSequence(a), ambc::BitSequence(b));
      },
      "Fraction of agreeing bits.", py::arg("a"), py::arg("b"));
  m.def(
      "calibrate_noise",
      [](std::optional<double> snr_db, double crs_re_power) {
        ambc::ChannelParams p;
        p.target_snr_db = snr_db;
        return ambc::calibrate_noise(p, crs_re_power);
      },
      py::arg("snr_db"), py::arg("crs_re_power") = 1.0);

  m.def(
      "default_config_json", [] { return ambc::to_json(ambc::ExperimentConfig{}).dump(); },
      "Default experiment configuration as a JSON string.");
  m.def(
      "resolve_config_json", [](const std::string& text) { return ambc::to_json(parse_config(text)).dump(); },
      py::arg("config_json"));

  m.def(
      "channel_estimates",
      [](const std::string& config_json, std::optional<double> snr_db, bool noiseless,
         std::optional<double> ratio, std::optional<double> duty, std::uint64_t seed) {
        const auto cfg = parse_config(config_json);
        cfg.validate();
        const auto resolved = ambc::resolve_point(cfg, make_point(snr_db, noiseless, ratio, duty));
        ambc::Observation obs;
        {
          py::gil_scoped_release release;
          obs = ambc::simulate_observation(cfg, resolved, seed);
        }
        py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(obs.crs.size()));
        std::copy(obs.crs.estimates.begin(), obs.crs.estimates.end(), out.mutable_data());
        return out;
      },
      "Per-slot CRS channel estimates of one simulated observation.", py::arg("config_json") = "",
      py::arg("snr_db") = py::none(), py::arg("noiseless") = false, py::arg("backscatter_ratio_db") = py::none(),
      py::arg("traffic_duty") = py::none(), py::arg("seed") = 1);

  m.def(
      "run_point",
      [](const std::string& config_json, std::optional<double> snr_db, bool noiseless,
         std::optional<double> ratio, std::optional<double> duty) {
        const auto cfg = parse_config(config_json);
        ambc::DetectionReport r;
        {
          py::gil_scoped_release release;
          r = ambc::run_point(cfg, make_point(snr_db, noiseless, ratio, duty));
        }
        return report_to_dict(r);
      },
      py::arg("config_json") = "", py::arg("snr_db") = py::none(), py::arg("noiseless") = false,
      py::arg("backscatter_ratio_db") = py::none(), py::arg("traffic_duty") = py::none());

  m.def(
      "run_sweep",
      [](const std::string& config_json, const std::string& out_dir) {
        const auto cfg = parse_config(config_json);
        std::vector<ambc::DetectionReport> reports;
        {
          py::gil_scoped_release release;
          reports = ambc::run_sweep(cfg);
          if (!out_dir.empty()) {
            ambc::emit_report(reports, out_dir, ambc::ReportFormat::csv);
            ambc::emit_report(reports, out_dir, ambc::ReportFormat::summary_text);
          }
        }
        py::list out;
        for (const auto& r : reports) out.append(report_to_dict(r));
        return out;
      },
      "Runs every sweep point; writes the CSV and text reports when out_dir is set.",
      py::arg("config_json"), py::arg("out_dir") = "");

  m.def("selftest", [] {
    py::list out;
    for (const auto& r : ambc::run_selftest()) out.append(py::make_tuple(r.name, r.passed, r.detail));
    return out;
  });
}
