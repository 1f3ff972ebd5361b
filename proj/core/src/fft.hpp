#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace pavoc::detail {

// Real-input FFT of fixed size backed by an FFTW plan. One instance per
// thread; see real_fft().
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  // in: n reals, out: n/2+1 complex. Unnormalized.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // in: n/2+1 complex, out: n reals. Scaled by 1/n.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Thread-local cached transform of size n.
RealFft& real_fft(std::size_t n);

}  // namespace pavoc::detail
