#include "pavoc/mel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pavoc/errors.hpp"

namespace pavoc {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutableMap = Eigen::Map<RowMajor>;

ConstMap as_eigen(const RealMatrix& m) { return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())}; }
MutableMap as_eigen(RealMatrix& m) { return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())}; }

constexpr double kIdentityTolerance = 1e-4;
constexpr double kRankTolerance = 1e-8;

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

RealMatrix pseudo_inverse_mel(const RealMatrix& weights, double ridge) {
  if (weights.empty()) throw std::invalid_argument("pseudo_inverse_mel: empty matrix");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw std::invalid_argument("pseudo_inverse_mel: ridge must be finite and >= 0");
  if (weights.rows() > weights.cols())
    throw RankDeficiencyError("pseudo_inverse_mel: " + std::to_string(weights.rows()) + " rows exceed " +
                              std::to_string(weights.cols()) + " columns; no right inverse exists");

  const auto b = as_eigen(weights);
  RowMajor gram = b * b.transpose();

  if (ridge == 0.0) {
    // Singular values of B are the square roots of the eigenvalues of B B^T.
    Eigen::SelfAdjointEigenSolver<RowMajor> eig(gram, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    const double largest = std::sqrt(std::max(lambda.maxCoeff(), 0.0));
    const double smallest = std::sqrt(std::max(lambda.minCoeff(), 0.0));
    if (!(smallest > kRankTolerance * largest))
      throw RankDeficiencyError("pseudo_inverse_mel: filterbank is rank deficient (sigma_min/sigma_max = " +
                                std::to_string(largest > 0 ? smallest / largest : 0.0) +
                                "); construct it with a positive ridge");
  } else {
    gram.diagonal().array() += ridge;
  }

  // B+ = B^T G^-1, i.e. (G^-1 B)^T since G is symmetric.
  Eigen::LDLT<RowMajor> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw RankDeficiencyError("pseudo_inverse_mel: Gram matrix factorization failed");
  const RowMajor solved = ldlt.solve(RowMajor(b));

  RealMatrix result(weights.cols(), weights.rows());
  as_eigen(result) = solved.transpose();
  return result;
}

MelFilterbank::MelFilterbank(RealMatrix weights, unsigned sample_rate, double f_min, double f_max, double ridge)
    : weights_(std::move(weights)), sample_rate_(sample_rate), f_min_(f_min), f_max_(f_max), ridge_(ridge) {
  if (weights_.empty()) throw std::invalid_argument("MelFilterbank: empty weight matrix");
  for (std::size_t m = 0; m < weights_.rows(); ++m) {
    bool positive = false;
    for (double w : weights_.row(m)) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("MelFilterbank: weights must be finite and >= 0");
      positive = positive || w > 0.0;
    }
    if (!positive) throw ConfigurationError("MelFilterbank: band " + std::to_string(m) + " has no positive weight");
  }

  pseudo_inverse_ = pseudo_inverse_mel(weights_, ridge_);

  if (ridge_ == 0.0) {
    const RowMajor product = as_eigen(weights_) * as_eigen(pseudo_inverse_);
    const double deviation =
        (product - RowMajor::Identity(product.rows(), product.cols())).cwiseAbs().maxCoeff();
    if (deviation > kIdentityTolerance)
      throw RankDeficiencyError("MelFilterbank: B B+ deviates from identity by " + std::to_string(deviation));
  }
}

MelFilterbank build_mel_filterbank(std::size_t bands, const StftConfig& config, double f_min, double f_max, double ridge) {
  config.validate();
  const std::size_t bins = config.bins();
  const double nyquist = config.sample_rate / 2.0;
  if (f_max < 0.0) f_max = nyquist;
  if (bands == 0) throw std::invalid_argument("build_mel_filterbank: bands must be positive");
  if (bands >= bins)
    throw RankDeficiencyError("build_mel_filterbank: " + std::to_string(bands) + " bands cannot have full row rank over " +
                              std::to_string(bins) + " bins");
  if (!(f_min >= 0.0) || !(f_min < f_max) || f_max > nyquist)
    throw std::invalid_argument("build_mel_filterbank: need 0 <= f_min < f_max <= sample_rate/2");

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(bands + 1));

  const double bin_hz = static_cast<double>(config.sample_rate) / static_cast<double>(config.n_fft);
  RealMatrix weights(bands, bins);
  for (std::size_t m = 0; m < bands; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      weights(m, k) = std::max(0.0, std::min(rising, falling)) * norm;
    }
  }
  return MelFilterbank(std::move(weights), config.sample_rate, f_min, f_max, ridge);
}

MelSpectrogram apply_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb) {
  if (mag.bins() != fb.bins())
    throw std::invalid_argument("apply_mel: magnitude has " + std::to_string(mag.bins()) + " bins, filterbank expects " +
                                std::to_string(fb.bins()));
  MelSpectrogram mel(mag.frames(), fb.bands());
  if (mag.frames() == 0) return mel;
  as_eigen(mel).noalias() = as_eigen(mag) * as_eigen(fb.weights()).transpose();
  return mel;
}

RealMatrix pseudo_inverse_image(const MelSpectrogram& mel, const MelFilterbank& fb) {
  if (mel.bands() != fb.bands())
    throw std::invalid_argument("estimate_magnitude: mel has " + std::to_string(mel.bands()) + " bands, filterbank has " +
                                std::to_string(fb.bands()));
  RealMatrix out(mel.frames(), fb.bins());
  if (mel.frames() == 0) return out;
  as_eigen(out).noalias() = as_eigen(mel) * as_eigen(fb.pseudo_inverse()).transpose();
  return out;
}

MagnitudeSpectrogram estimate_magnitude(const MelSpectrogram& mel, const MelFilterbank& fb) {
  RealMatrix image = pseudo_inverse_image(mel, fb);
  MagnitudeSpectrogram mag(image.rows(), image.cols());
  auto src = image.values();
  auto dst = mag.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(src[i], 0.0);
  return mag;
}

MelSpectrogram log_compress(const MelSpectrogram& mel, double floor) {
  MelSpectrogram out(mel.frames(), mel.bands());
  auto src = mel.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log10(std::max(src[i], floor));
  return out;
}

}  // namespace pavoc
