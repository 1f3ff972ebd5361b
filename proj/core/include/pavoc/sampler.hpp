#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pavoc/mel.hpp"
#include "pavoc/phase_retrieval.hpp"
#include "pavoc/predictor.hpp"
#include "pavoc/schedule.hpp"
#include "pavoc/stft.hpp"

namespace pavoc {

enum class SamplerVariant { plain, per_step_gla_baseline, corrected };
enum class SigmaMode { ddpm, ddim_zero };

std::string_view to_string(SamplerVariant v);
std::string_view to_string(SigmaMode m);
/// Accepts "plain", "baseline"/"per_step_gla_baseline", "corrected".
SamplerVariant parse_variant(std::string_view name);
/// Accepts "ddpm", "ddim0"/"ddim_zero".
SigmaMode parse_sigma_mode(std::string_view name);

struct SamplerConfig {
  SamplerVariant variant = SamplerVariant::corrected;
  SigmaMode sigma_mode = SigmaMode::ddpm;
  /// Stage 1 covers t = T .. stage1_end+1; stage 2 covers stage1_end .. 1.
  std::size_t stage1_end = 3;
  std::uint64_t seed = 0;
  GlaConfig gla;
  StftConfig stft;
  /// Keep every iterate in the trace instead of only its hash.
  bool trace_full_iterates = false;

  /// Throws ConfigurationError if stage1_end exceeds the schedule length.
  void validate(const NoiseSchedule& schedule) const;
};

struct StepRecord {
  std::size_t t = 0;
  /// FNV-1a of the float64 bytes of y_{t-1}.
  std::uint64_t iterate_hash = 0;
  std::vector<double> iterate;  // empty unless trace_full_iterates
  std::int64_t wall_ns = 0;
  std::int64_t finished_at_ns = 0;
};

struct GenerationTrace {
  std::int64_t setup_ns = 0;  // time spent on x~ before the loop
  std::vector<StepRecord> steps;
};

struct GenerationResult {
  std::vector<double> waveform;
  GenerationTrace trace;
};

/// y_t = sqrt(ab_t) y0 + sqrt(1 - ab_t) eps, t in [0, T].
std::vector<double> forward_diffuse(std::span<const double> y0, std::size_t t, std::span<const double> eps,
                                    const NoiseSchedule& schedule);

/// (y_t - sqrt(1 - ab_t) eps_hat) / sqrt(ab_t).
std::vector<double> predict_y0(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                               const NoiseSchedule& schedule);

/// (y_t - beta_t / sqrt(1 - ab_t) eps_hat) / sqrt(alpha_t) + sigma_ddpm(t) z.
std::vector<double> ddpm_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                              const NoiseSchedule& schedule, std::span<const double> z);

/// sqrt(ab_{t-1}) predict_y0 + sqrt(1 - ab_{t-1} - sigma^2) eps_hat + sigma z.
std::vector<double> ddim_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                              const NoiseSchedule& schedule, double sigma, std::span<const double> z);

/// ddim_step with predict_y0 replaced by x_tilde.
std::vector<double> corrected_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                                   const NoiseSchedule& schedule, double sigma, std::span<const double> z,
                                   std::span<const double> x_tilde);

/// Reimplementation of the per-step GLA update used for comparison: runs GLA on
/// the pseudo-inverse magnitude starting from the phase of stft(predict_y0),
/// then re-noises the result to level t-1 with z.
std::vector<double> per_step_gla_baseline_step(std::span<const double> y_t, std::span<const double> eps_hat,
                                               std::size_t t, const NoiseSchedule& schedule,
                                               const MelSpectrogram& mel, const MelFilterbank& fb,
                                               const StftConfig& stft_config, const GlaConfig& gla_config,
                                               std::span<const double> z);

double step_sigma(const NoiseSchedule& schedule, std::size_t t, SigmaMode mode);

/// Full reverse process. Draws y_T then one z per step from a single
/// CounterRng(config.seed). For the corrected variant x~ is computed once via
/// reconstruct_from_mel(seed = config.seed) unless `x_tilde` is supplied.
/// Predictor errors propagate and abort the generation.
GenerationResult generate(const MelSpectrogram& mel, const MelFilterbank& fb, NoisePredictor& predictor,
                          const NoiseSchedule& schedule, const SamplerConfig& config, std::size_t length,
                          std::optional<std::span<const double>> x_tilde = std::nullopt);

}  // namespace pavoc
