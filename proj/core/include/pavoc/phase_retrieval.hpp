#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "pavoc/mel.hpp"
#include "pavoc/stft.hpp"

namespace pavoc {

enum class GlaVariant { classic, fast };

struct RandomPhase {
  std::uint64_t seed = 0;
};
struct ZeroPhase {};
struct ProvidedPhase {
  ComplexSpectrogram spec;
};
using PhaseInit = std::variant<RandomPhase, ZeroPhase, ProvidedPhase>;

struct GlaConfig {
  std::size_t iterations = 32;
  GlaVariant variant = GlaVariant::fast;
  /// Only used by the fast variant; must lie in [0, 1).
  double momentum = 0.99;
  PhaseInit phase_init = RandomPhase{};

  void validate() const;
};

/// Called once per iteration with the consistent iterate stft(istft(M(c_k))).
using GlaObserver = std::function<void(std::size_t iteration, const ComplexSpectrogram& consistent)>;

/// Replaces each magnitude with the target, keeping the phase. Zero entries
/// take phase 0.
ComplexSpectrogram project_magnitude(const ComplexSpectrogram& spec, const MagnitudeSpectrogram& target);

/// stft(istft(spec)).
ComplexSpectrogram project_consistency(const ComplexSpectrogram& spec, const StftConfig& config, std::size_t length);

/// Signal length implied by a frame count: (frames-1)*hop when centered.
std::size_t signal_length_for_frames(std::size_t frames, const StftConfig& config);

/// Griffin-Lim phase retrieval. Classic: Y <- C(M(Y)). Fast:
/// t_k = C(M(c_k)), c_{k+1} = t_k + momentum (t_k - t_{k-1}), t_{-1} = t_0.
/// Returns istft(M(final iterate)). `length` defaults to
/// signal_length_for_frames(target.frames()).
std::vector<double> griffin_lim(const MagnitudeSpectrogram& target, const StftConfig& stft_config,
                                const GlaConfig& gla_config, std::optional<std::size_t> length = std::nullopt,
                                const GlaObserver& observer = {});

/// x~ = griffin_lim(estimate_magnitude(mel)) from a random phase drawn with `seed`.
std::vector<double> reconstruct_from_mel(const MelSpectrogram& mel, const MelFilterbank& fb, const StftConfig& stft_config,
                                         const GlaConfig& gla_config, std::uint64_t seed,
                                         std::optional<std::size_t> length = std::nullopt);

}  // namespace pavoc
