#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

#include "ambc/error.hpp"
#include "ambc/lte_waveform.hpp"
#include "fft.hpp"

namespace ambc {
namespace detail {

namespace {
// FFTW's planner is not thread-safe.
std::mutex planner_mutex;
}  // namespace

UnitaryDft::UnitaryDft(int size, Direction direction)
    : size_(size), scale_(1.0 / std::sqrt(static_cast<double>(size))) {
  std::lock_guard lock(planner_mutex);
  in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size));
  out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size));
  // FFTW_ESTIMATE keeps the chosen algorithm, and therefore the rounding,
  // identical from run to run.
  plan_ = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(in_),
                           reinterpret_cast<fftw_complex*>(out_),
                           direction == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           FFTW_ESTIMATE);
}

UnitaryDft::~UnitaryDft() {
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(in_);
  fftw_free(out_);
}

void UnitaryDft::execute(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), in_);
  fftw_execute(static_cast<fftw_plan>(plan_));
  for (int i = 0; i < size_; ++i) out[static_cast<std::size_t>(i)] = out_[i] * scale_;
}

}  // namespace detail

SampleBuffer synthesize_baseband(const ResourceGrid& grid, const GridConfig& cfg) {
  cfg.validate();
  if (grid.n_subcarriers() != cfg.n_subcarriers() || grid.n_symbols() % kSymbolsPerSlot != 0) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("grid is {} x {}, configuration expects {} subcarriers and whole slots",
                            grid.n_subcarriers(), grid.n_symbols(), cfg.n_subcarriers()));
  }
  const int n = cfg.fft_size;
  detail::UnitaryDft idft(n, detail::UnitaryDft::Direction::inverse);
  std::vector<cdouble> bins(static_cast<std::size_t>(n));
  std::vector<cdouble> body(static_cast<std::size_t>(n));

  SampleBuffer out;
  out.sample_rate = cfg.sample_rate;
  out.samples.reserve(static_cast<std::size_t>(grid.n_slots()) * cfg.slot_samples());
  for (int s = 0; s < grid.n_symbols(); ++s) {
    std::fill(bins.begin(), bins.end(), cdouble{});
    const auto sym = grid.symbol(s);
    for (int k = 0; k < grid.n_subcarriers(); ++k) bins[cfg.fft_bin(k)] = sym[k];
    idft.execute(bins, body);
    const int cp = cfg.cp_length(s % kSymbolsPerSlot);
    out.samples.insert(out.samples.end(), body.end() - cp, body.end());
    out.samples.insert(out.samples.end(), body.begin(), body.end());
  }
  return out;
}

ResourceGrid demodulate_baseband(const SampleBuffer& rx, const GridConfig& cfg) {
  cfg.validate();
  const auto slot_len = static_cast<std::size_t>(cfg.slot_samples());
  if (std::abs(rx.sample_rate - cfg.sample_rate) > 1e-6 * cfg.sample_rate) {
    throw Error(Errc::representation_mismatch,
                fmt::format("buffer rate {} Hz, configuration {} Hz", rx.sample_rate, cfg.sample_rate));
  }
  if (rx.samples.size() < slot_len) {
    throw Error(Errc::insufficient_data,
                fmt::format("{} samples hold less than one slot ({})", rx.samples.size(), slot_len));
  }
  const auto n_slots = static_cast<int>(rx.samples.size() / slot_len);
  const int n = cfg.fft_size;
  detail::UnitaryDft dft(n, detail::UnitaryDft::Direction::forward);
  std::vector<cdouble> bins(static_cast<std::size_t>(n));

  ResourceGrid grid(cfg.n_subcarriers(), n_slots * kSymbolsPerSlot, false);
  std::size_t pos = 0;
  for (int s = 0; s < grid.n_symbols(); ++s) {
    const int cp = cfg.cp_length(s % kSymbolsPerSlot);
    dft.execute(std::span(rx.samples).subspan(pos + cp, static_cast<std::size_t>(n)), bins);
    pos += static_cast<std::size_t>(cp + n);
    auto sym = grid.symbol(s);
    for (int k = 0; k < grid.n_subcarriers(); ++k) sym[k] = bins[cfg.fft_bin(k)];
  }
  return grid;
}

}  // namespace ambc
