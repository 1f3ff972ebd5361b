#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pavoc/mel.hpp"
#include "pavoc/schedule.hpp"

namespace pavoc {

/// Arguments of one noise-prediction call: eps(y_t, mel, sqrt(alpha_bar_t)).
struct PredictorRequest {
  std::span<const double> y_t;
  const MelSpectrogram& mel;
  double noise_level;
};

/// Produces eps_hat with the same length as y_t. Implementations must be
/// deterministic for identical requests.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual std::vector<double> predict(const PredictorRequest& request) = 0;
  /// True when the instance cannot serve concurrent generations.
  virtual bool exclusive() const { return false; }
};

/// Exact noise given the clean reference: (y_t - sqrt(ab) y0) / sqrt(1 - ab),
/// with ab resolved from the request's noise level (nearest step, 1e-9).
/// Throws std::invalid_argument for noise level 1 (t = 0) or no matching step.
std::vector<double> oracle_predict(const PredictorRequest& request, std::span<const double> y0_ref,
                                   const NoiseSchedule& schedule);

inline constexpr double kNoPerturbation = std::numeric_limits<double>::infinity();

/// oracle_predict plus white Gaussian noise whose power is the oracle output
/// power times 10^(-snr_db/10). The perturbation stream is keyed by (seed,
/// step), so repeated calls with the same request return identical output.
/// snr_db = +inf returns the oracle unchanged.
std::vector<double> degraded_oracle_predict(const PredictorRequest& request, std::span<const double> y0_ref,
                                            const NoiseSchedule& schedule, double snr_db, std::uint64_t seed);

class OraclePredictor : public NoisePredictor {
 public:
  OraclePredictor(std::vector<double> y0_ref, NoiseSchedule schedule)
      : y0_(std::move(y0_ref)), schedule_(std::move(schedule)) {}
  std::vector<double> predict(const PredictorRequest& request) override {
    return oracle_predict(request, y0_, schedule_);
  }

 private:
  std::vector<double> y0_;
  NoiseSchedule schedule_;
};

class DegradedOraclePredictor : public NoisePredictor {
 public:
  DegradedOraclePredictor(std::vector<double> y0_ref, NoiseSchedule schedule, double snr_db, std::uint64_t seed)
      : y0_(std::move(y0_ref)), schedule_(std::move(schedule)), snr_db_(snr_db), seed_(seed) {}
  std::vector<double> predict(const PredictorRequest& request) override {
    return degraded_oracle_predict(request, y0_, schedule_, snr_db_, seed_);
  }

 private:
  std::vector<double> y0_;
  NoiseSchedule schedule_;
  double snr_db_;
  std::uint64_t seed_;
};

/// Always predicts zero noise. Cheapest possible predictor.
class ZeroPredictor : public NoisePredictor {
 public:
  std::vector<double> predict(const PredictorRequest& request) override {
    return std::vector<double>(request.y_t.size(), 0.0);
  }
};

}  // namespace pavoc
