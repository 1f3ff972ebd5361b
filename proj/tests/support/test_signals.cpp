#include "test_signals.hpp"

#include <cmath>
#include <numbers>

#include "pavoc/rng.hpp"

namespace pavoc::testing {

std::vector<double> make_utterance(std::uint64_t seed, std::size_t length, unsigned sample_rate) {
  CounterRng rng(seed ^ 0xA11CE5EEDull);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  const double sr = sample_rate;
  const double f0 = uniform(90.0, 220.0);
  const double vibrato_rate = uniform(1.0, 4.0);
  const double formants[3] = {uniform(300.0, 900.0), uniform(900.0, 2500.0), uniform(2400.0, 3500.0)};
  const double syllable_rate = uniform(1.5, 3.0);
  const double syllable_phase = uniform(0.0, 6.0);

  std::vector<double> x(length, 0.0);
  std::vector<double> phase(length);
  double acc = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    const double t = n / sr;
    acc += 2.0 * std::numbers::pi * f0 * (1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * vibrato_rate * t)) / sr;
    phase[n] = acc;
  }
  for (int h = 1; h < 40; ++h) {
    const double fh = h * f0;
    if (fh > sr / 2.0 - 500.0) break;
    double amp = 0.05;
    for (double fm : formants) amp += std::exp(-((fh - fm) / 200.0) * ((fh - fm) / 200.0));
    amp /= std::sqrt(static_cast<double>(h));
    for (std::size_t n = 0; n < length; ++n) x[n] += amp * std::sin(h * phase[n]);
  }
  double energy = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    const double t = n / sr;
    const double env = std::sqrt(std::max(0.0, std::sin(2.0 * std::numbers::pi * syllable_rate * t + syllable_phase)));
    x[n] = x[n] * env + 0.01 * rng.gaussian() * env;
    energy += x[n] * x[n];
  }
  const double rms = std::sqrt(energy / static_cast<double>(length));
  if (rms > 0.0)
    for (auto& v : x) v *= 0.1 / rms;
  return x;
}

std::vector<double> random_signal(std::uint64_t seed, std::size_t length, double scale) {
  CounterRng rng(seed);
  std::vector<double> x(length);
  for (auto& v : x) v = scale * rng.gaussian();
  return x;
}

double relative_rms(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

MelSpectrogram mel_of(const std::vector<double>& signal, const MelFilterbank& fb, const StftConfig& config) {
  return apply_mel(magnitude(stft(signal, config)), fb);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pavoc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pavoc::testing
