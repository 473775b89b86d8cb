#pragma once

#include <complex>
#include <span>

namespace ambc::detail {

/// Unitary DFT of fixed size backed by an FFTW plan.
class UnitaryDft {
 public:
  enum class Direction { forward, inverse };

  UnitaryDft(int size, Direction direction);
  ~UnitaryDft();
  UnitaryDft(const UnitaryDft&) = delete;
  UnitaryDft& operator=(const UnitaryDft&) = delete;

  int size() const { return size_; }
  /// out[k] = n^(-1/2) * sum_t in[t] exp(-+ j 2 pi k t / n)
  void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

 private:
  int size_;
  double scale_;
  std::complex<double>* in_;
  std::complex<double>* out_;
  void* plan_;
};

}  // namespace ambc::detail
