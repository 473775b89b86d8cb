// ambc: run ambient-backscatter link experiments from the command line.
//
//   ambc run      --config exp.json --out results/
//   ambc sweep    --config sweep.json --out results/ --workers 4
//   ambc selftest
//   ambc defaults > exp.json

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ambc/config.hpp"
#include "ambc/error.hpp"
#include "ambc/harness.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> workers;
  std::optional<double> duration;
  std::optional<int> trials;
  std::string out_dir = "ambc-out";
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", o.seed, "override the run seed");
  cmd->add_option("-m,--mode", o.mode, "grid or waveform")->check(CLI::IsMember({"grid", "waveform"}));
  cmd->add_option("-w,--workers", o.workers, "worker threads for GRID mode")->check(CLI::PositiveNumber);
  cmd->add_option("-d,--duration", o.duration, "observation time per trial, seconds");
  cmd->add_option("-t,--trials", o.trials, "trials per point")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", o.out_dir, "output directory");
  cmd->add_flag("-q,--quiet", o.quiet, "do not print the summary table");
}

ambc::ExperimentConfig resolve(const Overrides& o) {
  ambc::ExperimentConfig cfg = o.config_path.empty() ? ambc::ExperimentConfig{} : ambc::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) cfg.mode = ambc::parse_mode(*o.mode);
  if (o.workers) cfg.workers = *o.workers;
  if (o.duration) cfg.duration_s = *o.duration;
  if (o.trials) cfg.trials = *o.trials;
  cfg.validate();
  return cfg;
}

void finish(const ambc::ExperimentConfig& cfg, const std::vector<ambc::DetectionReport>& reports,
            const Overrides& o) {
  auto files = ambc::emit_report(reports, o.out_dir, ambc::ReportFormat::csv);
  const auto text = ambc::emit_report(reports, o.out_dir, ambc::ReportFormat::summary_text);
  files.insert(files.end(), text.begin(), text.end());
  const auto config_path = std::filesystem::path(o.out_dir) / "config.json";
  std::ofstream(config_path) << ambc::to_json(cfg).dump(2) << '\n';
  files.push_back(config_path);
  if (!o.quiet) std::cout << ambc::summary_text(reports);
  for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pilot-based ambient backscatter over LTE: link simulator"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::optional<double> snr, ratio, duty;
  bool noiseless = false;
  auto* run = app.add_subcommand("run", "simulate a single operating point");
  add_common(run, run_opts);
  run->add_option("--snr", snr, "CRS SNR in dB");
  run->add_flag("--noiseless", noiseless, "disable receiver noise");
  run->add_option("--ratio", ratio, "backscatter-to-direct power ratio in dB");
  run->add_option("--duty", duty, "traffic duty: 0 or 1 constant, otherwise bursty");

  Overrides sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "simulate every point of the configured sweep axes");
  add_common(sweep, sweep_opts);

  auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");
  auto* defaults = app.add_subcommand("defaults", "print the default configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults) {
      std::cout << ambc::to_json(ambc::ExperimentConfig{}).dump(2) << '\n';
      return 0;
    }
    if (*selftest) {
      int failed = 0;
      for (const auto& r : ambc::run_selftest()) {
        fmt::print("{} {:<16} {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        failed += !r.passed;
      }
      return failed ? 1 : 0;
    }
    if (*run) {
      auto cfg = resolve(run_opts);
      ambc::SweepPoint point;
      if (noiseless) {
        point.has_snr = true;
      } else if (snr) {
        point.has_snr = true;
        point.snr_db = snr;
      }
      point.backscatter_ratio_db = ratio;
      point.traffic_duty = duty;
      finish(cfg, {ambc::run_point(cfg, point)}, run_opts);
      return 0;
    }
    auto cfg = resolve(sweep_opts);
    if (cfg.sweep.empty()) {
      std::cerr << "error: the config defines no sweep axes\n";
      return 2;
    }
    finish(cfg, ambc::run_sweep(cfg), sweep_opts);
    return 0;
  } catch (const ambc::Error& e) {
    std::cerr << "error (" << ambc::to_string(e.code()) << "): " << e.what() << '\n';
    return e.code() == ambc::Errc::io ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
