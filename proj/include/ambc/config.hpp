#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ambc/bitseq.hpp"
#include "ambc/channel.hpp"
#include "ambc/lte_waveform.hpp"
#include "ambc/receiver.hpp"
#include "ambc/zed.hpp"

namespace ambc {

/// GRID reads CRS REs straight from the frequency-domain grid; WAVEFORM runs
/// OFDM synthesis, a time-domain channel and the receiver FFT.
enum class Mode { grid, waveform };

/// How GRID mode produces the noise on the per-slot CRS estimate:
/// per_re draws every CRS RE; slot_aggregate draws the slot average directly
/// from its exact distribution CN(0, sigma^2 / pilots_per_slot).
enum class GridNoise { per_re, slot_aggregate };

struct ZedConfig {
  bool enabled = true;
  BitSequence payload = default_payload();
  LfsrSpec sync_lfsr{};
  double start_offset_s = 0.0;
  double clock_skew_ppm = 0.0;
};

struct ChannelConfig {
  std::optional<double> snr_db = 10.0;  // nullopt: noiseless
  double backscatter_ratio_db = -15.0;
  double backscatter_phase_deg = 0.0;
  cdouble h_direct{1.0, 0.0};
  Fading fading = Fading::static_channel;
  double coherence_s = 0.1;

  ChannelParams params() const;
};

struct ReceiverSettings {
  double threshold = 0.8;
  int offset_candidates = 8;
};

struct SweepAxes {
  std::vector<std::optional<double>> snr_db;
  std::vector<double> traffic_duty;
  std::vector<double> backscatter_ratio_db;

  bool empty() const { return snr_db.empty() && traffic_duty.empty() && backscatter_ratio_db.empty(); }
};

struct ExperimentConfig {
  GridConfig grid;
  CrsConfig crs;
  TrafficModel traffic;
  FskConfig fsk;
  ZedConfig zed;
  ChannelConfig channel;
  ReceiverSettings receiver;

  double duration_s = 48.0;
  std::uint64_t seed = 1;
  Mode mode = Mode::grid;
  GridNoise grid_noise = GridNoise::per_re;
  /// Also run the contrast receiver that uses total received power per slot.
  bool contrast_receiver = false;
  int workers = 1;
  int trials = 1;
  SweepAxes sweep;

  /// One channel estimate per slot.
  static constexpr double kEstimateRate = 2000.0;

  BitSequence sync() const;
  BitSequence frame() const;
  ReceiverConfig receiver_config() const;
  /// Throws Errc::config (or the module's own error) on the first violation.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

}  // namespace ambc
