#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pavoc/mel.hpp"
#include "pavoc/stft.hpp"

namespace pavoc {

/// Fields are absent when no reference signal was available.
struct MetricReport {
  std::optional<double> spectral_convergence;
  std::optional<double> log_spectral_distance_db;
  std::optional<double> snr_db;
  std::optional<double> mel_consistency;
};

/// ||ref - est||_F / ||ref||_F. Throws std::domain_error when ref is all zero.
double spectral_convergence(const MagnitudeSpectrogram& ref, const MagnitudeSpectrogram& est);

/// sqrt(mean over frames of mean over bins of (20 log10(max(ref,floor)/max(est,floor)))^2).
double log_spectral_distance(const MagnitudeSpectrogram& ref, const MagnitudeSpectrogram& est, double floor = 1e-5);

/// 10 log10(sum ref^2 / sum (ref-est)^2); +inf when est == ref.
/// Throws std::domain_error for a silent reference.
double snr_db(std::span<const double> ref, std::span<const double> est);

/// ||apply_mel(|stft(waveform)|) - mel||_F / ||mel||_F.
double mel_consistency(std::span<const double> waveform, const MelSpectrogram& conditioning_mel, const MelFilterbank& fb,
                       const StftConfig& stft_config);

/// Metrics of `estimate` against an optional time-domain reference. Metrics
/// that are undefined for the input (silent mel or silent reference) stay absent.
MetricReport evaluate(std::span<const double> estimate, const MelSpectrogram& conditioning_mel, const MelFilterbank& fb,
                      const StftConfig& stft_config, std::optional<std::span<const double>> reference = std::nullopt);

struct RtfMeasurement {
  double rtf = 0.0;             // audio_seconds / median_seconds
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  std::vector<double> samples;  // seconds per repetition
};

/// Runs `task` `repetitions` times on one dedicated thread and reports the
/// real-time factor of the median run. Exceptions from the task propagate.
RtfMeasurement measure_rtf(const std::function<void()>& task, double audio_seconds, std::size_t repetitions);

/// One CSV line per generated file:
/// path,variant,stage1_end,spectral_convergence,lsd_db,snr_db,mel_consistency,rtf
struct MetricRow {
  std::string path;
  std::string variant;
  std::size_t stage1_end = 0;
  MetricReport report;
  std::optional<double> rtf;
};

std::string metric_csv_header();
std::string format_metric_row(const MetricRow& row);

}  // namespace pavoc
