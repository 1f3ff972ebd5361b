#include "pavoc/schedule.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pavoc {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw std::invalid_argument("NoiseSchedule: need at least one step");
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0))
      throw std::invalid_argument("NoiseSchedule: beta[" + std::to_string(i + 1) + "] = " + std::to_string(b) +
                                  " outside (0, 1)");
  }
  const std::size_t T = betas_.size();
  alpha_bars_.assign(T + 1, 1.0);
  sigmas_.assign(T + 1, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
    sigmas_[t] = std::sqrt((1.0 - alpha_bars_[t - 1]) / (1.0 - alpha_bars_[t]) * betas_[t - 1]);
  }
}

NoiseSchedule NoiseSchedule::geometric(std::size_t steps, double first, double last) {
  if (steps == 0) throw std::invalid_argument("NoiseSchedule::geometric: need at least one step");
  if (!(first > 0.0) || !(last > 0.0)) throw std::invalid_argument("NoiseSchedule::geometric: endpoints must be positive");
  std::vector<double> betas(steps);
  if (steps == 1) {
    betas[0] = first;
  } else {
    const double ratio = std::log(last / first) / static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) betas[i] = first * std::exp(ratio * static_cast<double>(i));
    betas.back() = last;
  }
  return NoiseSchedule(std::move(betas));
}

double NoiseSchedule::noise_level(std::size_t t) const { return std::sqrt(alpha_bar(t)); }

std::optional<std::size_t> NoiseSchedule::step_for_noise_level(double level, double tolerance) const {
  std::optional<std::size_t> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < alpha_bars_.size(); ++t) {
    const double distance = std::abs(std::sqrt(alpha_bars_[t]) - level);
    if (distance < best_distance) {
      best_distance = distance;
      best = t;
    }
  }
  if (best_distance > tolerance) return std::nullopt;
  return best;
}

std::size_t NoiseSchedule::checked(std::size_t t, std::size_t lowest) const {
  if (t < lowest || t > betas_.size())
    throw std::invalid_argument("NoiseSchedule: step " + std::to_string(t) + " outside [" + std::to_string(lowest) + ", " +
                                std::to_string(betas_.size()) + "]");
  return t;
}

}  // namespace pavoc
