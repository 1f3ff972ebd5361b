#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pavoc/mel.hpp"
#include "pavoc/stft.hpp"

namespace pavoc::testing {

/// Voiced, speech-like test signal: a vibrato harmonic series shaped by three
/// random formants under a syllable-rate envelope, plus a little breath noise.
/// RMS is normalized to 0.1.
std::vector<double> make_utterance(std::uint64_t seed, std::size_t length = 22050, unsigned sample_rate = 22050);

std::vector<double> random_signal(std::uint64_t seed, std::size_t length, double scale = 1.0);

/// Relative RMS error ||a - b|| / ||b||.
double relative_rms(const std::vector<double>& a, const std::vector<double>& b);

/// Mel of an utterance under the given filterbank.
MelSpectrogram mel_of(const std::vector<double>& signal, const MelFilterbank& fb, const StftConfig& config);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace pavoc::testing
