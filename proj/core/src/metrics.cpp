#include "pavoc/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace pavoc {
namespace {

void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

std::string format_number(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double spectral_convergence(const MagnitudeSpectrogram& ref, const MagnitudeSpectrogram& est) {
  require_same_shape(ref, est, "spectral_convergence");
  double diff = 0.0, norm = 0.0;
  auto r = ref.values();
  auto e = est.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    diff += (r[i] - e[i]) * (r[i] - e[i]);
    norm += r[i] * r[i];
  }
  if (norm == 0.0) throw std::domain_error("spectral_convergence: reference has zero norm");
  return std::sqrt(diff / norm);
}

double log_spectral_distance(const MagnitudeSpectrogram& ref, const MagnitudeSpectrogram& est, double floor) {
  require_same_shape(ref, est, "log_spectral_distance");
  if (ref.frames() == 0 || ref.bins() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t f = 0; f < ref.frames(); ++f) {
    double frame = 0.0;
    auto r = ref.row(f);
    auto e = est.row(f);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double d = 20.0 * (std::log10(std::max(r[k], floor)) - std::log10(std::max(e[k], floor)));
      frame += d * d;
    }
    total += frame / static_cast<double>(r.size());
  }
  return std::sqrt(total / static_cast<double>(ref.frames()));
}

double snr_db(std::span<const double> ref, std::span<const double> est) {
  if (ref.size() != est.size()) throw std::invalid_argument("snr_db: length mismatch");
  double signal = 0.0, error = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    signal += ref[i] * ref[i];
    error += (ref[i] - est[i]) * (ref[i] - est[i]);
  }
  if (signal == 0.0) throw std::domain_error("snr_db: reference has zero power");
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

double mel_consistency(std::span<const double> waveform, const MelSpectrogram& conditioning_mel, const MelFilterbank& fb,
                       const StftConfig& stft_config) {
  const auto mel = apply_mel(magnitude(stft(waveform, stft_config)), fb);
  if (!mel.same_shape(conditioning_mel))
    throw std::invalid_argument("mel_consistency: waveform gives " + std::to_string(mel.frames()) +
                                " frames, conditioning mel has " + std::to_string(conditioning_mel.frames()));
  double diff = 0.0, norm = 0.0;
  auto a = mel.values();
  auto b = conditioning_mel.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  if (norm == 0.0) throw std::domain_error("mel_consistency: conditioning mel has zero norm");
  return std::sqrt(diff / norm);
}

MetricReport evaluate(std::span<const double> estimate, const MelSpectrogram& conditioning_mel, const MelFilterbank& fb,
                      const StftConfig& stft_config, std::optional<std::span<const double>> reference) {
  MetricReport report;
  const auto mel_values = conditioning_mel.values();
  if (std::any_of(mel_values.begin(), mel_values.end(), [](double v) { return v != 0.0; }))
    report.mel_consistency = mel_consistency(estimate, conditioning_mel, fb, stft_config);
  const bool audible = reference && std::any_of(reference->begin(), reference->end(), [](double v) { return v != 0.0; });
  if (reference && reference->size() != estimate.size())
    throw std::invalid_argument("evaluate: reference has " + std::to_string(reference->size()) + " samples, estimate " +
                                std::to_string(estimate.size()));
  if (audible) {
    const auto ref_mag = magnitude(stft(*reference, stft_config));
    const auto est_mag = magnitude(stft(estimate, stft_config));
    report.spectral_convergence = spectral_convergence(ref_mag, est_mag);
    report.log_spectral_distance_db = log_spectral_distance(ref_mag, est_mag);
    report.snr_db = snr_db(*reference, estimate);
  }
  return report;
}

RtfMeasurement measure_rtf(const std::function<void()>& task, double audio_seconds, std::size_t repetitions) {
  if (repetitions == 0) throw std::invalid_argument("measure_rtf: repetitions must be >= 1");
  RtfMeasurement m;
  std::exception_ptr failure;
  std::thread worker([&] {
    try {
      for (std::size_t i = 0; i < repetitions; ++i) {
        const auto start = std::chrono::steady_clock::now();
        task();
        const auto stop = std::chrono::steady_clock::now();
        m.samples.push_back(std::chrono::duration<double>(stop - start).count());
      }
    } catch (...) {
      failure = std::current_exception();
    }
  });
  worker.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<double> sorted = m.samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  m.median_seconds = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  m.min_seconds = sorted.front();
  m.max_seconds = sorted.back();
  m.rtf = m.median_seconds > 0.0 ? audio_seconds / m.median_seconds : std::numeric_limits<double>::infinity();
  return m;
}

std::string metric_csv_header() { return "path,variant,stage1_end,spectral_convergence,lsd_db,snr_db,mel_consistency,rtf"; }

std::string format_metric_row(const MetricRow& row) {
  std::string line = csv_escape(row.path) + "," + row.variant + "," + std::to_string(row.stage1_end);
  for (const auto& v : {row.report.spectral_convergence, row.report.log_spectral_distance_db, row.report.snr_db,
                        row.report.mel_consistency, row.rtf})
    line += "," + format_number(v);
  return line;
}

}  // namespace pavoc
