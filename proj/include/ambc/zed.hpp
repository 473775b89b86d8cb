#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ambc/bitseq.hpp"

namespace ambc {

/// Square-wave FSK of the reflection coefficient.
struct FskConfig {
  double f0 = 125.0;  // bit '0'
  double f1 = 500.0;  // bit '1'
  double symbol_duration = 0.040;
  double s_off = 0.0;
  double s_on = 1.0;
  double inter_frame_gap = 0.0;

  double frequency(std::uint8_t bit) const { return bit ? f1 : f0; }
  double frame_duration(std::size_t bits) const { return static_cast<double>(bits) * symbol_duration; }
  /// Reflection state at `t` seconds into a symbol carrying `bit`. Every
  /// symbol starts at s_on.
  double state(std::uint8_t bit, double t_in_symbol) const;

  /// Checks tone separation, whole periods per symbol, and that both tones
  /// sit below half of `observation_rate` (the channel-estimate rate).
  void validate(double observation_rate = 2000.0) const;
};

/// Reflection states sampled on a uniform time base.
struct ReflectionWaveform {
  std::vector<double> states;
  double time_base = 0.0;
  double s_off = 0.0;

  double duration() const { return static_cast<double>(states.size()) / time_base; }
  /// Sample-and-hold lookup; s_off outside the covered interval.
  double state_at(double t) const;
};

/// One frame: symbol_duration seconds of square wave per bit. Throws
/// Errc::aliasing when time_base < 2 max(f0, f1).
ReflectionWaveform modulate_frame(const BitSequence& frame, const FskConfig& cfg, double time_base);

/// Frames tiled (with inter_frame_gap of s_off between them) over
/// total_duration; the last frame may be cut short.
ReflectionWaveform repeat_frames(const BitSequence& frame, const FskConfig& cfg,
                                 double total_duration, double time_base);

/// CSV with header "time_s,state".
void write_waveform_csv(std::ostream& out, const ReflectionWaveform& waveform);

struct FrameTiming {
  std::size_t index;
  double start;  // seconds
  double end;
};

/// The tag as seen from the channel: the frame sent periodically from
/// `start_offset`, with an optional clock error (positive ppm = fast clock,
/// shorter symbols).
class ZedTransmitter {
 public:
  ZedTransmitter(BitSequence frame, FskConfig fsk, double start_offset = 0.0,
                 double clock_skew_ppm = 0.0);

  double state_at(double t) const;
  double frame_period() const;
  double symbol_period() const;
  /// Frames that start and end inside [0, duration].
  std::vector<FrameTiming> frames_within(double duration) const;

  const BitSequence& frame() const { return frame_; }
  const FskConfig& fsk() const { return fsk_; }

 private:
  BitSequence frame_;
  FskConfig fsk_;
  double start_offset_;
  double rate_;  // local seconds per true second
};

}  // namespace ambc
