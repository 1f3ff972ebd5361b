#include "pavoc/stft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "pavoc/errors.hpp"

namespace pavoc {
namespace {

// numpy-style "reflect" (edge sample not repeated), applied repeatedly for
// offsets beyond one signal length.
std::size_t reflect_index(std::ptrdiff_t j, std::size_t length) {
  if (length == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (length - 1));
  std::ptrdiff_t m = j % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(length)) m = period - m;
  return static_cast<std::size_t>(m);
}

std::ptrdiff_t padding(const StftConfig& config) {
  return config.centered ? static_cast<std::ptrdiff_t>(config.n_fft / 2) : 0;
}

}  // namespace

std::size_t StftConfig::frame_count(std::size_t length) const {
  if (centered) return 1 + length / hop_length;
  if (length < n_fft) return 0;
  return 1 + (length - n_fft) / hop_length;
}

void StftConfig::validate() const {
  if (n_fft == 0 || win_length == 0 || hop_length == 0)
    throw std::invalid_argument("StftConfig: n_fft, win_length and hop_length must be positive");
  if (win_length > n_fft) throw std::invalid_argument("StftConfig: win_length exceeds n_fft");
  if (hop_length > win_length) throw std::invalid_argument("StftConfig: hop_length exceeds win_length");
  if (sample_rate == 0) throw std::invalid_argument("StftConfig: sample_rate must be positive");
}

double StftConfig::cola_deviation() const {
  const auto window = make_hann_window(win_length);
  std::vector<double> sums(hop_length, 0.0);
  for (std::size_t k = 0; k < win_length; ++k) sums[k % hop_length] += window[k];
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(sums.size());
  if (mean <= 0.0) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double s : sums) worst = std::max(worst, std::abs(s - mean) / mean);
  return worst;
}

StftConfig StftConfig::vocoder_default(unsigned sample_rate) {
  StftConfig config;
  config.sample_rate = sample_rate;
  return config;
}

std::vector<double> make_hann_window(std::size_t length) {
  if (length == 0) throw std::invalid_argument("make_hann_window: length must be positive");
  std::vector<double> w(length);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t k = 0; k < length; ++k) w[k] = 0.5 * (1.0 - std::cos(step * static_cast<double>(k)));
  return w;
}

std::vector<double> analysis_window(const StftConfig& config) {
  config.validate();
  std::vector<double> frame(config.n_fft, 0.0);
  const auto hann = make_hann_window(config.win_length);
  std::copy(hann.begin(), hann.end(), frame.begin() + static_cast<std::ptrdiff_t>((config.n_fft - config.win_length) / 2));
  return frame;
}

ComplexSpectrogram stft(std::span<const double> signal, const StftConfig& config) {
  config.validate();
  if (signal.empty()) throw std::invalid_argument("stft: empty signal");
  const std::size_t frames = config.frame_count(signal.size());
  if (frames == 0)
    throw std::invalid_argument("stft: signal shorter than n_fft without centering (" + std::to_string(signal.size()) + " samples)");

  const auto window = analysis_window(config);
  const std::size_t n_fft = config.n_fft;
  const std::ptrdiff_t pad = padding(config);
  auto& fft = detail::real_fft(n_fft);

  ComplexSpectrogram spec(frames, config.bins());
  std::vector<double> buffer(n_fft);
  for (std::size_t m = 0; m < frames; ++m) {
    const auto start = static_cast<std::ptrdiff_t>(m * config.hop_length) - pad;
    for (std::size_t n = 0; n < n_fft; ++n) {
      const std::ptrdiff_t j = start + static_cast<std::ptrdiff_t>(n);
      const bool inside = j >= 0 && j < static_cast<std::ptrdiff_t>(signal.size());
      buffer[n] = window[n] * signal[inside ? static_cast<std::size_t>(j) : reflect_index(j, signal.size())];
    }
    fft.forward(buffer, spec.row(m));
  }
  return spec;
}

std::vector<double> istft(const ComplexSpectrogram& spec, const StftConfig& config, std::size_t target_length) {
  config.validate();
  if (spec.bins() != config.bins())
    throw std::invalid_argument("istft: spectrogram has " + std::to_string(spec.bins()) + " bins, config expects " +
                                std::to_string(config.bins()));
  if (target_length == 0) throw std::invalid_argument("istft: target_length must be positive");
  if (spec.frames() != config.frame_count(target_length))
    throw std::invalid_argument("istft: " + std::to_string(spec.frames()) + " frames do not match target length " +
                                std::to_string(target_length));
  if (!config.satisfies_cola())
    throw ConfigurationError("istft: Hann window of " + std::to_string(config.win_length) + " with hop " +
                             std::to_string(config.hop_length) + " violates constant overlap-add");

  const auto window = analysis_window(config);
  const std::size_t n_fft = config.n_fft;
  const std::size_t span_length = (spec.frames() - 1) * config.hop_length + n_fft;
  std::vector<double> numerator(span_length, 0.0);
  std::vector<double> denominator(span_length, 0.0);

  auto& fft = detail::real_fft(n_fft);
  std::vector<double> frame(n_fft);
  for (std::size_t m = 0; m < spec.frames(); ++m) {
    fft.inverse(spec.row(m), frame);
    const std::size_t offset = m * config.hop_length;
    for (std::size_t n = 0; n < n_fft; ++n) {
      numerator[offset + n] += window[n] * frame[n];
      denominator[offset + n] += window[n] * window[n];
    }
  }

  std::vector<double> out_num(target_length, 0.0);
  std::vector<double> out_den(target_length, 0.0);
  const std::ptrdiff_t pad = padding(config);
  const auto length = static_cast<std::ptrdiff_t>(target_length);
  for (std::size_t p = 0; p < span_length; ++p) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(p) - pad;
    std::size_t dest;
    if (j >= 0 && j < length) {
      dest = static_cast<std::size_t>(j);
    } else if (config.centered) {
      dest = reflect_index(j, target_length);
    } else {
      continue;
    }
    out_num[dest] += numerator[p];
    out_den[dest] += denominator[p];
  }

  std::vector<double> signal(target_length, 0.0);
  for (std::size_t j = 0; j < target_length; ++j)
    if (out_den[j] > 0.0) signal[j] = out_num[j] / out_den[j];
  return signal;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec) {
  MagnitudeSpectrogram mag(spec.frames(), spec.bins());
  auto in = spec.values();
  auto out = mag.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::abs(in[i]);
  return mag;
}

}  // namespace pavoc
