#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pavoc/matrix.hpp"

namespace pavoc {

/// Analysis/synthesis parameters. The window is a periodic Hann of
/// `win_length` samples, centered inside an `n_fft` frame.
struct StftConfig {
  std::size_t n_fft = 2048;
  std::size_t win_length = 1200;
  std::size_t hop_length = 300;
  unsigned sample_rate = 22050;
  bool centered = true;

  std::size_t bins() const { return n_fft / 2 + 1; }
  /// Number of frames produced for a signal of `length` samples.
  std::size_t frame_count(std::size_t length) const;

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
  /// Max relative deviation of the overlapped window sum from its mean.
  double cola_deviation() const;
  bool satisfies_cola() const { return cola_deviation() <= 1e-10; }

  /// n_fft 2048, Hann 1200, hop 300.
  static StftConfig vocoder_default(unsigned sample_rate = 22050);

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// frames x (n_fft/2 + 1) complex STFT, linear amplitude.
class ComplexSpectrogram : public Matrix<std::complex<double>> {
 public:
  using Matrix::Matrix;
  std::size_t frames() const { return rows(); }
  std::size_t bins() const { return cols(); }
};

/// frames x bins, entries >= 0.
class MagnitudeSpectrogram : public RealMatrix {
 public:
  using Matrix::Matrix;
  std::size_t frames() const { return rows(); }
  std::size_t bins() const { return cols(); }
};

/// Periodic Hann: w[k] = 0.5 (1 - cos(2 pi k / length)).
std::vector<double> make_hann_window(std::size_t length);

/// The Hann window zero-padded (centered) to n_fft samples.
std::vector<double> analysis_window(const StftConfig& config);

/// Forward STFT. Unnormalized DFT per frame: X[k] = sum_n w[n] x[n] e^{-2 pi i k n / N},
/// so sum over the full spectrum of |X|^2 equals N times the windowed frame energy.
ComplexSpectrogram stft(std::span<const double> signal, const StftConfig& config);

/// Least-squares inverse of stft(): windowed overlap-add divided by the summed
/// squared window. With centering, padded samples are folded back onto the
/// samples they were reflected from, so istft(stft(x)) == x and
/// stft(istft(Y)) is an orthogonal projection. Throws ConfigurationError when
/// the window/hop pair is not COLA.
std::vector<double> istft(const ComplexSpectrogram& spec, const StftConfig& config, std::size_t target_length);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec);

}  // namespace pavoc
