#include "pavoc/sampler.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "pavoc/errors.hpp"
#include "pavoc/rng.hpp"

namespace pavoc {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count();
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

void require_step(std::size_t t, const NoiseSchedule& schedule, const char* what) {
  if (t < 1 || t > schedule.steps())
    throw std::invalid_argument(std::string(what) + ": step " + std::to_string(t) + " outside [1, " +
                                std::to_string(schedule.steps()) + "]");
}

// out = a*x + b*y + c*z, skipping terms whose coefficient is exactly zero so
// that e.g. 1*x + 0*y reproduces x bit for bit.
std::vector<double> combine(double a, std::span<const double> x, double b, std::span<const double> y, double c,
                            std::span<const double> z) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i];
  if (b != 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b * y[i];
  if (c != 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * z[i];
  return out;
}

double direction_coefficient(double alpha_bar_prev, double sigma) {
  const double radicand = 1.0 - alpha_bar_prev - sigma * sigma;
  if (radicand < -1e-12)
    throw std::invalid_argument("ddim_step: sigma^2 = " + std::to_string(sigma * sigma) + " exceeds 1 - alpha_bar(t-1) = " +
                                std::to_string(1.0 - alpha_bar_prev));
  return radicand > 0.0 ? std::sqrt(radicand) : 0.0;
}

std::uint64_t hash_iterate(std::span<const double> y) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(y.data()), y.size_bytes()});
}

void check_prediction(std::span<const double> eps_hat, std::size_t expected) {
  if (eps_hat.size() != expected)
    throw ContractViolation("predictor returned " + std::to_string(eps_hat.size()) + " samples, expected " +
                            std::to_string(expected));
  for (double v : eps_hat)
    if (!std::isfinite(v)) throw ContractViolation("predictor returned a non-finite value");
}

}  // namespace

std::string_view to_string(SamplerVariant v) {
  switch (v) {
    case SamplerVariant::plain: return "plain";
    case SamplerVariant::per_step_gla_baseline: return "baseline";
    case SamplerVariant::corrected: return "corrected";
  }
  return "?";
}

std::string_view to_string(SigmaMode m) { return m == SigmaMode::ddpm ? "ddpm" : "ddim0"; }

SamplerVariant parse_variant(std::string_view name) {
  if (name == "plain") return SamplerVariant::plain;
  if (name == "baseline" || name == "per_step_gla_baseline") return SamplerVariant::per_step_gla_baseline;
  if (name == "corrected") return SamplerVariant::corrected;
  throw ConfigurationError("unknown sampler variant '" + std::string(name) + "'");
}

SigmaMode parse_sigma_mode(std::string_view name) {
  if (name == "ddpm") return SigmaMode::ddpm;
  if (name == "ddim0" || name == "ddim_zero") return SigmaMode::ddim_zero;
  throw ConfigurationError("unknown sigma mode '" + std::string(name) + "'");
}

void SamplerConfig::validate(const NoiseSchedule& schedule) const {
  if (stage1_end > schedule.steps())
    throw ConfigurationError("stage1_end " + std::to_string(stage1_end) + " exceeds schedule length " +
                             std::to_string(schedule.steps()));
  gla.validate();
  stft.validate();
}

std::vector<double> forward_diffuse(std::span<const double> y0, std::size_t t, std::span<const double> eps,
                                    const NoiseSchedule& schedule) {
  require_same_length(y0, eps, "forward_diffuse");
  if (t > schedule.steps()) throw std::invalid_argument("forward_diffuse: step " + std::to_string(t) + " out of range");
  const double ab = schedule.alpha_bar(t);
  return combine(std::sqrt(ab), y0, std::sqrt(1.0 - ab), eps, 0.0, eps);
}

std::vector<double> predict_y0(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                               const NoiseSchedule& schedule) {
  require_same_length(y_t, eps_hat, "predict_y0");
  require_step(t, schedule, "predict_y0");
  const double ab = schedule.alpha_bar(t);
  const double noise = std::sqrt(1.0 - ab);
  const double signal = std::sqrt(ab);
  std::vector<double> out(y_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (y_t[i] - noise * eps_hat[i]) / signal;
  return out;
}

std::vector<double> ddpm_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                              const NoiseSchedule& schedule, std::span<const double> z) {
  require_same_length(y_t, eps_hat, "ddpm_step");
  require_same_length(y_t, z, "ddpm_step");
  require_step(t, schedule, "ddpm_step");
  const double scale = 1.0 / std::sqrt(schedule.alpha(t));
  const double eps_coefficient = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
  const double sigma = schedule.sigma_ddpm(t);
  std::vector<double> out(y_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * (y_t[i] - eps_coefficient * eps_hat[i]);
  if (sigma != 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * z[i];
  return out;
}

std::vector<double> ddim_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                              const NoiseSchedule& schedule, double sigma, std::span<const double> z) {
  require_same_length(y_t, z, "ddim_step");
  const auto y0 = predict_y0(y_t, eps_hat, t, schedule);
  const double ab_prev = schedule.alpha_bar(t - 1);
  return combine(std::sqrt(ab_prev), y0, direction_coefficient(ab_prev, sigma), eps_hat, sigma, z);
}

std::vector<double> corrected_step(std::span<const double> y_t, std::span<const double> eps_hat, std::size_t t,
                                   const NoiseSchedule& schedule, double sigma, std::span<const double> z,
                                   std::span<const double> x_tilde) {
  require_same_length(y_t, eps_hat, "corrected_step");
  require_same_length(y_t, z, "corrected_step");
  require_same_length(y_t, x_tilde, "corrected_step");
  require_step(t, schedule, "corrected_step");
  const double ab_prev = schedule.alpha_bar(t - 1);
  return combine(std::sqrt(ab_prev), x_tilde, direction_coefficient(ab_prev, sigma), eps_hat, sigma, z);
}

std::vector<double> per_step_gla_baseline_step(std::span<const double> y_t, std::span<const double> eps_hat,
                                               std::size_t t, const NoiseSchedule& schedule,
                                               const MelSpectrogram& mel, const MelFilterbank& fb,
                                               const StftConfig& stft_config, const GlaConfig& gla_config,
                                               std::span<const double> z) {
  require_same_length(y_t, z, "per_step_gla_baseline_step");
  const auto y0 = predict_y0(y_t, eps_hat, t, schedule);
  GlaConfig config = gla_config;
  config.phase_init = ProvidedPhase{stft(y0, stft_config)};
  const auto estimate = griffin_lim(estimate_magnitude(mel, fb), stft_config, config, y0.size());
  return forward_diffuse(estimate, t - 1, z, schedule);
}

double step_sigma(const NoiseSchedule& schedule, std::size_t t, SigmaMode mode) {
  return mode == SigmaMode::ddpm ? schedule.sigma_ddpm(t) : 0.0;
}

GenerationResult generate(const MelSpectrogram& mel, const MelFilterbank& fb, NoisePredictor& predictor,
                          const NoiseSchedule& schedule, const SamplerConfig& config, std::size_t length,
                          std::optional<std::span<const double>> x_tilde) {
  config.validate(schedule);
  if (length == 0) throw std::invalid_argument("generate: length must be positive");
  if (config.stft.frame_count(length) != mel.frames())
    throw std::invalid_argument("generate: " + std::to_string(length) + " samples imply " +
                                std::to_string(config.stft.frame_count(length)) + " frames, mel has " +
                                std::to_string(mel.frames()));

  const std::size_t T = schedule.steps();
  const bool has_stage1 = config.variant != SamplerVariant::plain && config.stage1_end < T;

  GenerationResult result;
  const auto setup_start = Clock::now();
  std::vector<double> correction;
  if (has_stage1 && config.variant == SamplerVariant::corrected) {
    if (x_tilde) {
      if (x_tilde->size() != length) throw std::invalid_argument("generate: supplied x_tilde has the wrong length");
      correction.assign(x_tilde->begin(), x_tilde->end());
    } else {
      correction = reconstruct_from_mel(mel, fb, config.stft, config.gla, config.seed, length);
    }
  }
  const auto loop_start = Clock::now();
  result.trace.setup_ns = elapsed_ns(setup_start, loop_start);

  CounterRng rng(config.seed);
  std::vector<double> y = rng.gaussian_vector(length);
  std::vector<double> z(length);
  result.trace.steps.reserve(T);

  for (std::size_t t = T; t >= 1; --t) {
    const auto step_start = Clock::now();
    auto eps_hat = predictor.predict({y, mel, schedule.noise_level(t)});
    check_prediction(eps_hat, length);
    rng.fill_gaussian(z);
    const double sigma = step_sigma(schedule, t, config.sigma_mode);

    const bool stage1 = has_stage1 && t > config.stage1_end;
    if (stage1 && config.variant == SamplerVariant::corrected) {
      y = corrected_step(y, eps_hat, t, schedule, sigma, z, correction);
    } else if (stage1 && config.variant == SamplerVariant::per_step_gla_baseline) {
      y = per_step_gla_baseline_step(y, eps_hat, t, schedule, mel, fb, config.stft, config.gla, z);
    } else {
      y = ddim_step(y, eps_hat, t, schedule, sigma, z);
    }

    const auto step_end = Clock::now();
    StepRecord record;
    record.t = t;
    record.iterate_hash = hash_iterate(y);
    if (config.trace_full_iterates) record.iterate = y;
    record.wall_ns = elapsed_ns(step_start, step_end);
    record.finished_at_ns = elapsed_ns(setup_start, step_end);
    result.trace.steps.push_back(std::move(record));
  }

  result.waveform = std::move(y);
  return result;
}

}  // namespace pavoc
