#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>

#include "ambc/lte_waveform.hpp"
#include "ambc/random.hpp"

namespace ambc {

enum class Fading { static_channel, block_rayleigh };

/// Direct and backscatter path gains plus the noise operating point.
struct ChannelParams {
  cdouble h_direct{1.0, 0.0};
  cdouble h_backscatter{0.0, 0.0};
  /// SNR of the ambient signal over CRS REs; nullopt disables noise.
  std::optional<double> target_snr_db = 10.0;
  Fading fading = Fading::static_channel;
  /// Block length for block-Rayleigh fading, seconds.
  double coherence_s = 0.1;

  /// h_backscatter = h_direct * 10^(ratio_db / 20) * exp(j phase).
  static ChannelParams from_ratio(double backscatter_ratio_db, double phase_rad = 0.0,
                                  cdouble h_direct = {1.0, 0.0});

  /// 10 log10(|h_b|^2 / |h_d|^2); -inf when the tag is absent.
  double backscatter_ratio_db() const;
  void validate() const;
};

/// |h_direct|^2 * crs_re_power / 10^(snr/10), or 0 with noise disabled.
/// Throws Errc::invalid_argument for a nonpositive CRS power.
double calibrate_noise(const ChannelParams& p, double crs_re_power = 1.0);

/// Reflection coefficient as a function of absolute time (seconds).
using ReflectionFn = std::function<double(double)>;

/// Path gains over time; for block-Rayleigh fading each coherence block
/// draws fresh CN(0,1) multipliers for both paths from the fading stream.
/// Not thread-safe (caches the current block).
class ChannelGains {
 public:
  ChannelGains(const ChannelParams& p, std::uint64_t seed);

  /// h_direct(t) + h_backscatter(t) * s
  cdouble composite(double t, double s) const;

 private:
  void load_block(long block) const;

  ChannelParams p_;
  std::uint64_t seed_;
  mutable long block_ = -1;
  mutable cdouble hd_;
  mutable cdouble hb_;
};

/// Noise draws organised in chunks of slots, each chunk with its own stream
/// derived from (seed, stream, chunk). Any slot range can therefore be
/// regenerated without the preceding slots. After seek(slot) the caller
/// draws exactly draws_per_slot values for that slot.
class SlotNoise {
 public:
  static constexpr long kChunkSlots = 2000;

  SlotNoise(std::uint64_t seed, Stream stream, long draws_per_slot);

  void seek(long slot);
  cdouble next(double variance) { return source_.complex(variance); }
  GaussianSource& source() { return source_; }

 private:
  std::uint64_t seed_;
  Stream stream_;
  long draws_per_slot_;
  long chunk_ = -1;
  long next_slot_ = 0;
  GaussianSource source_;
};

/// GRID mode. Every RE of OFDM symbol l in slot k is scaled by the composite
/// gain at that symbol's midpoint and receives CN(0, sigma^2) noise. CRS REs
/// draw from the CRS noise stream (per slot: CRS symbols in order, pilots by
/// ascending subcarrier), all other REs from the auxiliary stream.
/// `first_slot` is the absolute index of the grid's first slot.
ResourceGrid apply_channel(const ResourceGrid& tx, const GridConfig& cfg, const CrsConfig& crs,
                           const ReflectionFn& s, const ChannelParams& p, std::uint64_t seed,
                           long first_slot = 0);

/// WAVEFORM mode. Each sample is scaled by the composite gain at its own
/// instant. Noise for each symbol body is drawn per FFT bin (CRS bins from
/// the same CRS stream as GRID mode) and brought to the time domain with the
/// unitary inverse DFT, which yields white Gaussian noise of variance
/// sigma^2; cyclic-prefix samples get independent noise.
SampleBuffer apply_channel(const SampleBuffer& tx, const GridConfig& cfg, const CrsConfig& crs,
                           const ReflectionFn& s, const ChannelParams& p, std::uint64_t seed,
                           long first_slot = 0);

}  // namespace ambc
