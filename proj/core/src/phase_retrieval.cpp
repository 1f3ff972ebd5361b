#include "pavoc/phase_retrieval.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pavoc/rng.hpp"

namespace pavoc {
namespace {

void check_target(const MagnitudeSpectrogram& target) {
  for (double v : target.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("griffin_lim: target magnitude must be finite and >= 0");
}

ComplexSpectrogram initial_spectrogram(const MagnitudeSpectrogram& target, const PhaseInit& init) {
  ComplexSpectrogram spec(target.frames(), target.bins());
  auto mag = target.values();
  auto out = spec.values();
  if (const auto* random = std::get_if<RandomPhase>(&init)) {
    CounterRng rng(random->seed);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(mag[i], 2.0 * std::numbers::pi * rng.uniform());
  } else if (std::holds_alternative<ZeroPhase>(init)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mag[i];
  } else {
    const auto& provided = std::get<ProvidedPhase>(init).spec;
    if (!provided.same_shape(target))
      throw std::invalid_argument("griffin_lim: provided phase has shape " + std::to_string(provided.frames()) + "x" +
                                  std::to_string(provided.bins()) + ", target is " + std::to_string(target.frames()) +
                                  "x" + std::to_string(target.bins()));
    spec = provided;
  }
  return spec;
}

}  // namespace

void GlaConfig::validate() const {
  if (variant == GlaVariant::fast && !(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("GlaConfig: momentum must lie in [0, 1)");
}

ComplexSpectrogram project_magnitude(const ComplexSpectrogram& spec, const MagnitudeSpectrogram& target) {
  if (!spec.same_shape(target)) throw std::invalid_argument("project_magnitude: shape mismatch");
  ComplexSpectrogram out(spec.frames(), spec.bins());
  auto in = spec.values();
  auto mag = target.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double current = std::abs(in[i]);
    dst[i] = current > 0.0 ? in[i] * (mag[i] / current) : std::complex<double>(mag[i], 0.0);
  }
  return out;
}

ComplexSpectrogram project_consistency(const ComplexSpectrogram& spec, const StftConfig& config, std::size_t length) {
  return stft(istft(spec, config, length), config);
}

std::size_t signal_length_for_frames(std::size_t frames, const StftConfig& config) {
  if (frames == 0) throw std::invalid_argument("signal_length_for_frames: no frames");
  const std::size_t span = (frames - 1) * config.hop_length;
  return config.centered ? std::max<std::size_t>(span, 1) : span + config.n_fft;
}

std::vector<double> griffin_lim(const MagnitudeSpectrogram& target, const StftConfig& stft_config, const GlaConfig& gla_config,
                                std::optional<std::size_t> length, const GlaObserver& observer) {
  gla_config.validate();
  check_target(target);
  if (target.bins() != stft_config.bins()) throw std::invalid_argument("griffin_lim: target bins do not match STFT config");
  const std::size_t n = length.value_or(signal_length_for_frames(target.frames(), stft_config));
  if (stft_config.frame_count(n) != target.frames())
    throw std::invalid_argument("griffin_lim: length " + std::to_string(n) + " inconsistent with " +
                                std::to_string(target.frames()) + " frames");

  ComplexSpectrogram current = initial_spectrogram(target, gla_config.phase_init);
  const bool accelerated = gla_config.variant == GlaVariant::fast && gla_config.momentum != 0.0;
  ComplexSpectrogram previous;

  for (std::size_t k = 0; k < gla_config.iterations; ++k) {
    ComplexSpectrogram consistent = project_consistency(project_magnitude(current, target), stft_config, n);
    if (observer) observer(k, consistent);
    if (accelerated) {
      if (k == 0) previous = consistent;
      auto t = consistent.values();
      auto prev = previous.values();
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto step = t[i] - prev[i];
        prev[i] = t[i];
        t[i] += gla_config.momentum * step;
      }
    }
    current = std::move(consistent);
  }
  return istft(project_magnitude(current, target), stft_config, n);
}

std::vector<double> reconstruct_from_mel(const MelSpectrogram& mel, const MelFilterbank& fb, const StftConfig& stft_config,
                                         const GlaConfig& gla_config, std::uint64_t seed, std::optional<std::size_t> length) {
  GlaConfig config = gla_config;
  config.phase_init = RandomPhase{seed};
  return griffin_lim(estimate_magnitude(mel, fb), stft_config, config, length);
}

}  // namespace pavoc
