#pragma once

#include <filesystem>
#include <string>

#include "pavoc/sampler.hpp"
#include "pavoc/schedule.hpp"

namespace pavoc {

/// Everything a run needs besides its input files.
///
/// File format (JSON). Keys may be nested objects or flat dotted names:
///
///   {
///     "schedule": {"betas": [1e-4, ..., 0.5]},
///     "sampler": {"variant": "corrected", "sigma_mode": "ddpm", "stage1_end": 3, "seed": 0},
///     "gla": {"iterations": 32, "momentum": 0.99, "variant": "fast"},
///     "stft": {"n_fft": 2048, "win_length": 1200, "hop_length": 300},
///     "mel": {"bands": 128, "f_min": 0, "f_max": -1}
///   }
///
/// Every key is optional; defaults are the values shown (f_max -1 = Nyquist).
struct RunConfig {
  NoiseSchedule schedule = NoiseSchedule::geometric();
  SamplerConfig sampler;
  std::size_t mel_bands = 128;
  double f_min = 0.0;
  double f_max = -1.0;

  void validate() const;
};

/// Throws ConfigurationError on unknown enum values, wrong types or invalid
/// schedules; ParseError on malformed JSON.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved config as JSON text (round-trips through parse_run_config).
std::string to_json(const RunConfig& config);

}  // namespace pavoc
