#include "ambc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ambc/error.hpp"

namespace ambc {

using nlohmann::json;

ChannelParams ChannelConfig::params() const {
  auto p = ChannelParams::from_ratio(backscatter_ratio_db,
                                     backscatter_phase_deg * std::numbers::pi / 180.0, h_direct);
  p.target_snr_db = snr_db;
  p.fading = fading;
  p.coherence_s = coherence_s;
  return p;
}

BitSequence ExperimentConfig::sync() const { return generate_m_sequence(zed.sync_lfsr); }

BitSequence ExperimentConfig::frame() const { return sync().concat(zed.payload); }

ReceiverConfig ExperimentConfig::receiver_config() const {
  auto rc = ReceiverConfig::for_fsk(fsk, kEstimateRate);
  rc.sync = sync();
  rc.data_bits = zed.payload.size();
  rc.threshold = receiver.threshold;
  rc.offset_candidates = receiver.offset_candidates;
  return rc;
}

void ExperimentConfig::validate() const {
  grid.validate();
  crs.validate();
  traffic.validate();
  fsk.validate(kEstimateRate);
  channel.params().validate();
  if (zed.payload.empty()) throw Error(Errc::config, "payload must not be empty");
  receiver_config().validate();
  if (!(duration_s >= kSlotDuration)) {
    throw Error(Errc::config, fmt::format("duration {} s is shorter than one slot", duration_s));
  }
  if (!(zed.start_offset_s >= 0.0)) throw Error(Errc::config, "zed.start_offset_s must be >= 0");
  if (workers < 1) throw Error(Errc::config, "workers must be >= 1");
  if (trials < 1) throw Error(Errc::config, "trials must be >= 1");
  for (double d : sweep.traffic_duty) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw Error(Errc::config, fmt::format("sweep traffic duty {} outside [0, 1]", d));
    }
  }
  for (double r : sweep.backscatter_ratio_db) {
    if (r > 0.0) throw Error(Errc::config, fmt::format("sweep backscatter ratio {} dB > 0", r));
  }
  for (const auto& s : sweep.snr_db) {
    if (s && !std::isfinite(*s)) throw Error(Errc::config, "sweep SNR values must be finite or null");
  }
}

const char* to_string(Mode mode) { return mode == Mode::grid ? "grid" : "waveform"; }

Mode parse_mode(const std::string& text) {
  if (text == "grid") return Mode::grid;
  if (text == "waveform") return Mode::waveform;
  throw Error(Errc::config, fmt::format("unknown mode '{}' (expected grid or waveform)", text));
}

namespace {

/// Reads an object section, rejecting keys the schema does not know.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(Errc::config, fmt::format("'{}' must be an object", name_));
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw Error(Errc::config, fmt::format("unknown key '{}{}'", prefix(), key));
      }
    }
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::config, fmt::format("bad value for '{}{}': {}", prefix(), key, e.what()));
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw Error(Errc::config, fmt::format("'{}{}' must be a number or null", prefix(), key));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

TrafficKind parse_traffic_kind(const std::string& s) {
  if (s == "constant_load") return TrafficKind::constant_load;
  if (s == "two_state_markov") return TrafficKind::two_state_markov;
  throw Error(Errc::config, fmt::format("unknown traffic kind '{}'", s));
}

Fading parse_fading(const std::string& s) {
  if (s == "static") return Fading::static_channel;
  if (s == "block_rayleigh") return Fading::block_rayleigh;
  throw Error(Errc::config, fmt::format("unknown fading model '{}'", s));
}

GridNoise parse_grid_noise(const std::string& s) {
  if (s == "per_re") return GridNoise::per_re;
  if (s == "slot_aggregate") return GridNoise::slot_aggregate;
  throw Error(Errc::config, fmt::format("unknown grid_noise '{}'", s));
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Section top(j, "");
  top.read("seed", cfg.seed);
  top.read("duration_s", cfg.duration_s);
  std::string mode = to_string(cfg.mode);
  top.read("mode", mode);
  cfg.mode = parse_mode(mode);
  std::string grid_noise = "per_re";
  top.read("grid_noise", grid_noise);
  cfg.grid_noise = parse_grid_noise(grid_noise);
  top.read("workers", cfg.workers);
  top.read("trials", cfg.trials);
  top.read("contrast_receiver", cfg.contrast_receiver);

  if (const json* g = top.child("grid")) {
    Section s(*g, "grid");
    s.read("bandwidth_rb", cfg.grid.bandwidth_rb);
    s.read("subcarrier_spacing_hz", cfg.grid.subcarrier_spacing);
    s.read("fft_size", cfg.grid.fft_size);
    s.read("sample_rate_hz", cfg.grid.sample_rate);
    s.read("carrier_hz", cfg.grid.carrier_hz);
  }
  if (const json* c = top.child("crs")) {
    Section s(*c, "crs");
    s.read("cell_id", cfg.crs.cell_id);
    s.read("frequency_stride", cfg.crs.frequency_stride);
    s.read("symbol_positions", cfg.crs.symbol_positions);
  }
  if (const json* t = top.child("traffic")) {
    Section s(*t, "traffic");
    std::string kind = cfg.traffic.kind == TrafficKind::constant_load ? "constant_load" : "two_state_markov";
    s.read("kind", kind);
    cfg.traffic.kind = parse_traffic_kind(kind);
    s.read("duty_target", cfg.traffic.duty_target);
    s.read("p_on_to_off", cfg.traffic.p_on_to_off);
    s.read("p_off_to_on", cfg.traffic.p_off_to_on);
    double power_db = linear_to_db(cfg.traffic.data_re_power);
    s.read("data_re_power_db", power_db);
    cfg.traffic.data_re_power = db_to_linear(power_db);
  }
  if (const json* f = top.child("fsk")) {
    Section s(*f, "fsk");
    s.read("f0_hz", cfg.fsk.f0);
    s.read("f1_hz", cfg.fsk.f1);
    s.read("symbol_duration_s", cfg.fsk.symbol_duration);
    s.read("s_off", cfg.fsk.s_off);
    s.read("s_on", cfg.fsk.s_on);
    s.read("inter_frame_gap_s", cfg.fsk.inter_frame_gap);
  }
  if (const json* z = top.child("zed")) {
    Section s(*z, "zed");
    s.read("enabled", cfg.zed.enabled);
    std::string payload = cfg.zed.payload.to_string();
    s.read("payload", payload);
    try {
      cfg.zed.payload = BitSequence::from_string(payload);
    } catch (const Error& e) {
      throw Error(Errc::config, fmt::format("zed.payload: {}", e.what()));
    }
    s.read("sync_taps", cfg.zed.sync_lfsr.taps);
    s.read("sync_degree", cfg.zed.sync_lfsr.degree);
    std::string seed;
    s.read("sync_seed", seed);
    if (!seed.empty()) cfg.zed.sync_lfsr.seed = LfsrSpec::seed_from_string(seed);
    s.read("start_offset_s", cfg.zed.start_offset_s);
    s.read("clock_skew_ppm", cfg.zed.clock_skew_ppm);
  }
  if (const json* c = top.child("channel")) {
    Section s(*c, "channel");
    s.read_optional("snr_db", cfg.channel.snr_db);
    s.read("backscatter_ratio_db", cfg.channel.backscatter_ratio_db);
    s.read("backscatter_phase_deg", cfg.channel.backscatter_phase_deg);
    std::vector<double> hd{cfg.channel.h_direct.real(), cfg.channel.h_direct.imag()};
    s.read("h_direct", hd);
    if (hd.size() != 2) throw Error(Errc::config, "channel.h_direct must be [re, im]");
    cfg.channel.h_direct = {hd[0], hd[1]};
    std::string fading = cfg.channel.fading == Fading::static_channel ? "static" : "block_rayleigh";
    s.read("fading", fading);
    cfg.channel.fading = parse_fading(fading);
    s.read("coherence_s", cfg.channel.coherence_s);
  }
  if (const json* r = top.child("receiver")) {
    Section s(*r, "receiver");
    s.read("threshold", cfg.receiver.threshold);
    s.read("offset_candidates", cfg.receiver.offset_candidates);
  }
  if (const json* w = top.child("sweep")) {
    Section s(*w, "sweep");
    if (const json* snr = s.child("snr_db")) {
      if (!snr->is_array()) throw Error(Errc::config, "sweep.snr_db must be an array");
      for (const auto& v : *snr) {
        if (v.is_null()) {
          cfg.sweep.snr_db.emplace_back();
        } else if (v.is_number()) {
          cfg.sweep.snr_db.emplace_back(v.get<double>());
        } else {
          throw Error(Errc::config, "sweep.snr_db entries must be numbers or null");
        }
      }
    }
    s.read("traffic_duty", cfg.sweep.traffic_duty);
    s.read("backscatter_ratio_db", cfg.sweep.backscatter_ratio_db);
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["duration_s"] = cfg.duration_s;
  j["mode"] = to_string(cfg.mode);
  j["grid_noise"] = cfg.grid_noise == GridNoise::per_re ? "per_re" : "slot_aggregate";
  j["workers"] = cfg.workers;
  j["trials"] = cfg.trials;
  j["contrast_receiver"] = cfg.contrast_receiver;
  j["grid"] = {{"bandwidth_rb", cfg.grid.bandwidth_rb},
               {"subcarrier_spacing_hz", cfg.grid.subcarrier_spacing},
               {"fft_size", cfg.grid.fft_size},
               {"sample_rate_hz", cfg.grid.sample_rate},
               {"carrier_hz", cfg.grid.carrier_hz}};
  j["crs"] = {{"cell_id", cfg.crs.cell_id},
              {"frequency_stride", cfg.crs.frequency_stride},
              {"symbol_positions", cfg.crs.symbol_positions}};
  j["traffic"] = {{"kind", cfg.traffic.kind == TrafficKind::constant_load ? "constant_load" : "two_state_markov"},
                  {"duty_target", cfg.traffic.duty_target},
                  {"p_on_to_off", cfg.traffic.p_on_to_off},
                  {"p_off_to_on", cfg.traffic.p_off_to_on},
                  {"data_re_power_db", linear_to_db(cfg.traffic.data_re_power)}};
  j["fsk"] = {{"f0_hz", cfg.fsk.f0},
              {"f1_hz", cfg.fsk.f1},
              {"symbol_duration_s", cfg.fsk.symbol_duration},
              {"s_off", cfg.fsk.s_off},
              {"s_on", cfg.fsk.s_on},
              {"inter_frame_gap_s", cfg.fsk.inter_frame_gap}};
  std::string seed;
  for (int i = 0; i < cfg.zed.sync_lfsr.degree; ++i) seed += (cfg.zed.sync_lfsr.seed >> i & 1u) ? '1' : '0';
  j["zed"] = {{"enabled", cfg.zed.enabled},
              {"payload", cfg.zed.payload.to_string()},
              {"sync_degree", cfg.zed.sync_lfsr.degree},
              {"sync_taps", cfg.zed.sync_lfsr.taps},
              {"sync_seed", seed},
              {"start_offset_s", cfg.zed.start_offset_s},
              {"clock_skew_ppm", cfg.zed.clock_skew_ppm}};
  j["channel"] = {{"snr_db", optional_number(cfg.channel.snr_db)},
                  {"backscatter_ratio_db", cfg.channel.backscatter_ratio_db},
                  {"backscatter_phase_deg", cfg.channel.backscatter_phase_deg},
                  {"h_direct", {cfg.channel.h_direct.real(), cfg.channel.h_direct.imag()}},
                  {"fading", cfg.channel.fading == Fading::static_channel ? "static" : "block_rayleigh"},
                  {"coherence_s", cfg.channel.coherence_s}};
  j["receiver"] = {{"threshold", cfg.receiver.threshold},
                   {"offset_candidates", cfg.receiver.offset_candidates}};
  json snr = json::array();
  for (const auto& s : cfg.sweep.snr_db) snr.push_back(optional_number(s));
  j["sweep"] = {{"snr_db", snr},
                {"traffic_duty", cfg.sweep.traffic_duty},
                {"backscatter_ratio_db", cfg.sweep.backscatter_ratio_db}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::config, fmt::format("{}: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

}  // namespace ambc
