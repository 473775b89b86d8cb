#include "ambc/zed.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ambc/error.hpp"

namespace ambc {

namespace {

// Sample instants that land exactly on a half-period edge belong to the
// following half period.
constexpr double kEdgeEps = 1e-9;

bool is_whole(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

double FskConfig::state(std::uint8_t bit, double t_in_symbol) const {
  const double cycles = t_in_symbol * frequency(bit) + kEdgeEps;
  const double phase = cycles - std::floor(cycles);
  return phase < 0.5 ? s_on : s_off;
}

void FskConfig::validate(double observation_rate) const {
  if (!(f0 > 0.0 && f1 > 0.0) || f0 == f1) {
    throw Error(Errc::config, fmt::format("FSK tones must be positive and distinct ({} / {} Hz)", f0, f1));
  }
  if (!(symbol_duration > 0.0)) throw Error(Errc::config, "symbol_duration must be positive");
  if (!is_whole(symbol_duration * f0) || !is_whole(symbol_duration * f1)) {
    throw Error(Errc::config,
                fmt::format("symbols of {} s do not hold whole periods of {} and {} Hz",
                            symbol_duration, f0, f1));
  }
  if (std::max(f0, f1) >= 0.5 * observation_rate) {
    throw Error(Errc::aliasing, fmt::format("tone {} Hz is not below half the {} Hz estimate rate",
                                            std::max(f0, f1), observation_rate));
  }
  if (std::abs(s_off) > 1.0 || std::abs(s_on) > 1.0) {
    throw Error(Errc::config, "reflection states must satisfy |s| <= 1");
  }
  if (!(inter_frame_gap >= 0.0)) throw Error(Errc::config, "inter_frame_gap must be >= 0");
}

double ReflectionWaveform::state_at(double t) const {
  if (t < 0.0) return s_off;
  const auto i = static_cast<std::size_t>(std::floor(t * time_base + kEdgeEps));
  return i < states.size() ? states[i] : s_off;
}

namespace {

void append_frame(std::vector<double>& out, const BitSequence& frame, const FskConfig& cfg,
                  double time_base, std::size_t max_samples) {
  const std::size_t per_symbol = static_cast<std::size_t>(std::llround(cfg.symbol_duration * time_base));
  for (std::size_t b = 0; b < frame.size() && out.size() < max_samples; ++b) {
    for (std::size_t i = 0; i < per_symbol && out.size() < max_samples; ++i) {
      out.push_back(cfg.state(frame[b], static_cast<double>(i) / time_base));
    }
  }
}

void check_time_base(const FskConfig& cfg, double time_base) {
  if (!(time_base >= 2.0 * std::max(cfg.f0, cfg.f1))) {
    throw Error(Errc::aliasing, fmt::format("time base {} Hz cannot represent a {} Hz square wave",
                                            time_base, std::max(cfg.f0, cfg.f1)));
  }
}

}  // namespace

ReflectionWaveform modulate_frame(const BitSequence& frame, const FskConfig& cfg, double time_base) {
  check_time_base(cfg, time_base);
  if (frame.empty()) throw Error(Errc::invalid_argument, "cannot modulate an empty frame");
  ReflectionWaveform w;
  w.time_base = time_base;
  w.s_off = cfg.s_off;
  append_frame(w.states, frame, cfg, time_base, static_cast<std::size_t>(-1));
  return w;
}

ReflectionWaveform repeat_frames(const BitSequence& frame, const FskConfig& cfg,
                                 double total_duration, double time_base) {
  check_time_base(cfg, time_base);
  if (frame.empty()) throw Error(Errc::invalid_argument, "cannot modulate an empty frame");
  if (!(total_duration > 0.0)) throw Error(Errc::invalid_argument, "total_duration must be positive");
  const auto total = static_cast<std::size_t>(std::llround(total_duration * time_base));
  const auto gap = static_cast<std::size_t>(std::llround(cfg.inter_frame_gap * time_base));
  ReflectionWaveform w;
  w.time_base = time_base;
  w.s_off = cfg.s_off;
  w.states.reserve(total);
  while (w.states.size() < total) {
    append_frame(w.states, frame, cfg, time_base, total);
    for (std::size_t i = 0; i < gap && w.states.size() < total; ++i) w.states.push_back(cfg.s_off);
  }
  return w;
}

void write_waveform_csv(std::ostream& out, const ReflectionWaveform& waveform) {
  out << "time_s,state\n";
  for (std::size_t i = 0; i < waveform.states.size(); ++i) {
    out << fmt::format("{:.9f},{:g}\n", static_cast<double>(i) / waveform.time_base, waveform.states[i]);
  }
}

ZedTransmitter::ZedTransmitter(BitSequence frame, FskConfig fsk, double start_offset,
                               double clock_skew_ppm)
    : frame_(std::move(frame)), fsk_(fsk), start_offset_(start_offset),
      rate_(1.0 + clock_skew_ppm * 1e-6) {
  if (frame_.empty()) throw Error(Errc::invalid_argument, "ZED frame is empty");
  if (!(start_offset_ >= 0.0)) throw Error(Errc::config, "ZED start offset must be >= 0");
  if (!(rate_ > 0.0)) throw Error(Errc::config, "clock skew must keep the clock running forward");
}

double ZedTransmitter::frame_period() const {
  return (fsk_.frame_duration(frame_.size()) + fsk_.inter_frame_gap) / rate_;
}

double ZedTransmitter::symbol_period() const { return fsk_.symbol_duration / rate_; }

double ZedTransmitter::state_at(double t) const {
  const double local = (t - start_offset_) * rate_;
  if (local < 0.0) return fsk_.s_off;
  const double period = fsk_.frame_duration(frame_.size()) + fsk_.inter_frame_gap;
  const double in_frame = local - std::floor(local / period + kEdgeEps) * period;
  const double within = std::max(in_frame, 0.0);
  const auto bit = static_cast<std::size_t>(std::floor(within / fsk_.symbol_duration + kEdgeEps));
  if (bit >= frame_.size()) return fsk_.s_off;
  return fsk_.state(frame_[bit], within - static_cast<double>(bit) * fsk_.symbol_duration);
}

std::vector<FrameTiming> ZedTransmitter::frames_within(double duration) const {
  std::vector<FrameTiming> frames;
  const double length = fsk_.frame_duration(frame_.size()) / rate_;
  for (std::size_t n = 0;; ++n) {
    const double start = start_offset_ + static_cast<double>(n) * frame_period();
    const double end = start + length;
    if (end > duration + 1e-9) break;
    frames.push_back({n, start, end});
  }
  return frames;
}

}  // namespace ambc
