#pragma once

#include <cstddef>

#include "pavoc/matrix.hpp"
#include "pavoc/stft.hpp"

namespace pavoc {

/// frames x bands, linear amplitude, entries >= 0.
class MelSpectrogram : public RealMatrix {
 public:
  using Matrix::Matrix;
  std::size_t frames() const { return rows(); }
  std::size_t bands() const { return cols(); }
};

/// HTK mel scale: 2595 log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Non-negative bands x bins weight matrix B with its right pseudo-inverse
/// B+ = B^T (B B^T + ridge I)^-1, computed once at construction.
class MelFilterbank {
 public:
  /// Validates the weights (non-negative, no silent band) and computes B+.
  /// At ridge 0 also checks that B B+ is within 1e-4 of the identity.
  MelFilterbank(RealMatrix weights, unsigned sample_rate, double f_min, double f_max, double ridge = 0.0);

  std::size_t bands() const { return weights_.rows(); }
  std::size_t bins() const { return weights_.cols(); }
  const RealMatrix& weights() const { return weights_; }
  /// bins x bands.
  const RealMatrix& pseudo_inverse() const { return pseudo_inverse_; }
  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }
  unsigned sample_rate() const { return sample_rate_; }
  double ridge() const { return ridge_; }

 private:
  RealMatrix weights_;
  RealMatrix pseudo_inverse_;
  unsigned sample_rate_;
  double f_min_;
  double f_max_;
  double ridge_;
};

/// Triangular filters spaced uniformly on the HTK mel scale between f_min and
/// f_max, each scaled by 2 / (right edge - left edge) in Hz (Slaney area
/// normalization). A negative f_max means Nyquist.
///
/// Throws RankDeficiencyError when bands >= bins and ConfigurationError when a
/// band covers no FFT bin.
MelFilterbank build_mel_filterbank(std::size_t bands, const StftConfig& config, double f_min = 0.0,
                                   double f_max = -1.0, double ridge = 0.0);

/// Right pseudo-inverse of a bands x bins matrix. At ridge 0 the matrix must
/// have full row rank (smallest singular value > 1e-8 of the largest);
/// otherwise RankDeficiencyError asks for a positive ridge.
RealMatrix pseudo_inverse_mel(const RealMatrix& weights, double ridge = 0.0);

/// mel = mag B^T, per frame.
MelSpectrogram apply_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb);

/// mel B+^T per frame, without clamping (entries may be slightly negative).
RealMatrix pseudo_inverse_image(const MelSpectrogram& mel, const MelFilterbank& fb);

/// pseudo_inverse_image clamped at zero.
MagnitudeSpectrogram estimate_magnitude(const MelSpectrogram& mel, const MelFilterbank& fb);

/// Elementwise log10(max(x, floor)); used only for predictor payloads.
MelSpectrogram log_compress(const MelSpectrogram& mel, double floor = 1e-5);

}  // namespace pavoc
