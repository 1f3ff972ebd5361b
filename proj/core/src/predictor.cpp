#include "pavoc/predictor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pavoc/rng.hpp"

namespace pavoc {
namespace {

std::size_t resolve_step(const PredictorRequest& request, const NoiseSchedule& schedule) {
  if (!(request.noise_level > 0.0 && request.noise_level <= 1.0))
    throw std::invalid_argument("oracle_predict: noise level " + std::to_string(request.noise_level) + " outside (0, 1]");
  const auto step = schedule.step_for_noise_level(request.noise_level);
  if (!step) throw std::invalid_argument("oracle_predict: noise level does not match any schedule step");
  if (*step == 0) throw std::invalid_argument("oracle_predict: noise level 1 (t = 0) has no defined noise");
  return *step;
}

}  // namespace

std::vector<double> oracle_predict(const PredictorRequest& request, std::span<const double> y0_ref,
                                   const NoiseSchedule& schedule) {
  if (request.y_t.size() != y0_ref.size())
    throw std::invalid_argument("oracle_predict: y_t has " + std::to_string(request.y_t.size()) +
                                " samples, reference has " + std::to_string(y0_ref.size()));
  const std::size_t t = resolve_step(request, schedule);
  const double signal = std::sqrt(schedule.alpha_bar(t));
  const double noise = std::sqrt(1.0 - schedule.alpha_bar(t));
  std::vector<double> eps(y0_ref.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (request.y_t[i] - signal * y0_ref[i]) / noise;
  return eps;
}

std::vector<double> degraded_oracle_predict(const PredictorRequest& request, std::span<const double> y0_ref,
                                            const NoiseSchedule& schedule, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("degraded_oracle_predict: snr_db must be finite or +inf");
  auto eps = oracle_predict(request, y0_ref, schedule);
  if (snr_db == kNoPerturbation || eps.empty()) return eps;

  double power = 0.0;
  for (double v : eps) power += v * v;
  power /= static_cast<double>(eps.size());
  if (power == 0.0) return eps;

  const double scale = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
  const std::size_t t = resolve_step(request, schedule);
  CounterRng rng(mix64(seed) ^ mix64(0x5EED0000ull + t));
  for (auto& v : eps) v += scale * rng.gaussian();
  return eps;
}

}  // namespace pavoc
