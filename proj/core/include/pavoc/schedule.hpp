#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pavoc {

/// Discrete noise schedule for T steps. Indexing is by diffusion step t:
/// alpha_bar(0) = 1 (empty product), so sigma_ddpm(1) = 0.
class NoiseSchedule {
 public:
  /// Throws std::invalid_argument unless every beta lies in (0, 1) and T >= 1.
  explicit NoiseSchedule(std::vector<double> betas);

  /// T betas spaced log-uniformly from `first` to `last`. Not a published
  /// vocoder schedule; a placeholder until one is loaded from config.
  static NoiseSchedule geometric(std::size_t steps = 6, double first = 1e-4, double last = 0.5);

  std::size_t steps() const { return betas_.size(); }
  const std::vector<double>& betas() const { return betas_; }

  double beta(std::size_t t) const { return betas_.at(checked(t, 1) - 1); }
  double alpha(std::size_t t) const { return 1.0 - beta(t); }
  /// t in [0, T].
  double alpha_bar(std::size_t t) const { return alpha_bars_.at(checked(t, 0)); }
  /// sqrt(((1 - alpha_bar(t-1)) / (1 - alpha_bar(t))) * beta(t)), t in [1, T].
  double sigma_ddpm(std::size_t t) const { return sigmas_.at(checked(t, 1)); }
  /// sqrt(alpha_bar(t)); the conditioning scalar handed to the predictor.
  double noise_level(std::size_t t) const;

  /// Step whose noise level is nearest to `level`, if within `tolerance`.
  std::optional<std::size_t> step_for_noise_level(double level, double tolerance = 1e-9) const;

 private:
  std::size_t checked(std::size_t t, std::size_t lowest) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // size T+1
  std::vector<double> sigmas_;      // size T+1, index 0 unused
};

}  // namespace pavoc
