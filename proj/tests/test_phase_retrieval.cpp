#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "pavoc/metrics.hpp"
#include "pavoc/phase_retrieval.hpp"
#include "pavoc/rng.hpp"
#include "support/test_signals.hpp"

using namespace pavoc;
using pavoc::testing::make_utterance;
using pavoc::testing::random_signal;
using pavoc::testing::relative_rms;

namespace {

double frobenius(const ComplexSpectrogram& a) {
  double s = 0.0;
  for (auto v : a.values()) s += std::norm(v);
  return std::sqrt(s);
}

double relative_frobenius(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::norm(a.values()[i] - b.values()[i]);
  const double norm = frobenius(b);
  return norm > 0 ? std::sqrt(diff) / norm : std::sqrt(diff);
}

ComplexSpectrogram random_spectrogram(std::uint64_t seed, std::size_t frames, std::size_t bins) {
  CounterRng rng(seed);
  ComplexSpectrogram s(frames, bins);
  for (auto& v : s.values()) v = {rng.gaussian(), rng.gaussian()};
  return s;
}

MagnitudeSpectrogram random_mel_target(std::uint64_t seed, const MelFilterbank& fb, std::size_t frames) {
  CounterRng rng(seed);
  MelSpectrogram mel(frames, fb.bands());
  for (auto& v : mel.values()) v = rng.uniform();
  return estimate_magnitude(mel, fb);
}

const StftConfig kConfig = StftConfig::vocoder_default();

}  // namespace

TEST_CASE("project_magnitude") {
  SUBCASE("fixed point when magnitudes already match") {
    const auto spec = random_spectrogram(1, 4, 1025);
    const auto out = project_magnitude(spec, magnitude(spec));
    CHECK(relative_frobenius(out, spec) < 1e-12);
  }
  SUBCASE("zero entry takes phase zero") {
    ComplexSpectrogram spec(1, 1);
    const auto out = project_magnitude(spec, MagnitudeSpectrogram(1, 1, {2.0}));
    CHECK(out(0, 0) == std::complex<double>(2.0, 0.0));
  }
  SUBCASE("3+4i scaled to magnitude 10") {
    ComplexSpectrogram spec(1, 1, {{3.0, 4.0}});
    const auto out = project_magnitude(spec, MagnitudeSpectrogram(1, 1, {10.0}));
    CHECK(out(0, 0).real() == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(out(0, 0).imag() == doctest::Approx(8.0).epsilon(1e-15));
  }
  SUBCASE("output magnitude equals target up to rounding") {
    const auto spec = random_spectrogram(2, 8, 1025);
    const auto target = magnitude(random_spectrogram(3, 8, 1025));
    const auto out = project_magnitude(spec, target);
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(std::abs(std::abs(out.values()[i]) - target.values()[i]) <= 4 * std::numeric_limits<double>::epsilon() * target.values()[i]);
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(project_magnitude(ComplexSpectrogram(2, 3), MagnitudeSpectrogram(3, 2)), std::invalid_argument); }
}

TEST_CASE("project_consistency") {
  const std::size_t length = 6000;
  const std::size_t frames = kConfig.frame_count(length);
  SUBCASE("consistent spectrograms are fixed points") {
    const auto spec = stft(random_signal(4, length), kConfig);
    CHECK(relative_frobenius(project_consistency(spec, kConfig, length), spec) < 1e-9);
  }
  SUBCASE("zero stays zero") {
    const auto out = project_consistency(ComplexSpectrogram(frames, 1025), kConfig, length);
    CHECK(frobenius(out) == 0.0);
  }
  SUBCASE("idempotent and non-expansive on random spectrograms") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto y = random_spectrogram(seed, frames, 1025);
      const auto once = project_consistency(y, kConfig, length);
      const auto twice = project_consistency(once, kConfig, length);
      CHECK(relative_frobenius(twice, once) < 1e-9);
      CHECK(frobenius(once) <= frobenius(y));
      const auto other = random_spectrogram(seed + 100, frames, 1025);
      ComplexSpectrogram diff(frames, 1025);
      const auto p_other = project_consistency(other, kConfig, length);
      ComplexSpectrogram pdiff(frames, 1025);
      for (std::size_t i = 0; i < diff.size(); ++i) {
        diff.values()[i] = y.values()[i] - other.values()[i];
        pdiff.values()[i] = once.values()[i] - p_other.values()[i];
      }
      CHECK(frobenius(pdiff) <= frobenius(diff));
    }
  }
}

TEST_CASE("griffin_lim with the true phase returns the signal") {
  const auto x = make_utterance(9, 8000);
  const auto spec = stft(x, kConfig);
  for (std::size_t iterations : {0u, 1u, 5u}) {
    for (auto variant : {GlaVariant::classic, GlaVariant::fast}) {
      GlaConfig config;
      config.iterations = iterations;
      config.variant = variant;
      config.phase_init = ProvidedPhase{spec};
      CHECK(relative_rms(griffin_lim(magnitude(spec), kConfig, config, x.size()), x) < 1e-6);
    }
  }
}

TEST_CASE("griffin_lim of a zero target with no iterations is silent") {
  GlaConfig config;
  config.iterations = 0;
  const auto out = griffin_lim(MagnitudeSpectrogram(10, 1025), kConfig, config);
  CHECK(out.size() == 9 * 300);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("classic griffin_lim error sequence is non-increasing") {
  const auto fb = build_mel_filterbank(128, kConfig);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto target = random_mel_target(seed, fb, 30);
    GlaConfig config;
    config.iterations = 32;
    config.variant = GlaVariant::classic;
    config.phase_init = RandomPhase{seed};
    std::vector<double> errors;
    griffin_lim(target, kConfig, config, std::nullopt,
                [&](std::size_t, const ComplexSpectrogram& consistent) {
                  errors.push_back(spectral_convergence(target, magnitude(consistent)));
                });
    REQUIRE(errors.size() == 32);
    for (std::size_t k = 1; k < errors.size(); ++k) CHECK(errors[k] <= errors[k - 1] + 1e-7);
    CHECK(errors.back() < errors.front());
  }
}

TEST_CASE("fast griffin_lim with zero momentum equals classic") {
  const auto fb = build_mel_filterbank(128, kConfig);
  const auto target = random_mel_target(42, fb, 20);
  GlaConfig classic;
  classic.variant = GlaVariant::classic;
  classic.iterations = 10;
  classic.phase_init = RandomPhase{5};
  GlaConfig fast = classic;
  fast.variant = GlaVariant::fast;
  fast.momentum = 0.0;
  const auto a = griffin_lim(target, kConfig, classic);
  const auto b = griffin_lim(target, kConfig, fast);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("griffin_lim is deterministic and validates inputs") {
  const auto fb = build_mel_filterbank(128, kConfig);
  const auto target = random_mel_target(3, fb, 12);
  GlaConfig config;
  config.iterations = 4;
  config.phase_init = RandomPhase{17};
  CHECK(griffin_lim(target, kConfig, config) == griffin_lim(target, kConfig, config));

  auto bad = target;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(griffin_lim(bad, kConfig, config), std::invalid_argument);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(griffin_lim(bad, kConfig, config), std::invalid_argument);

  config.phase_init = ProvidedPhase{ComplexSpectrogram(3, 1025)};
  CHECK_THROWS_AS(griffin_lim(target, kConfig, config), std::invalid_argument);
  config.phase_init = ZeroPhase{};
  config.momentum = 1.0;
  CHECK_THROWS_AS(griffin_lim(target, kConfig, config), std::invalid_argument);
}

TEST_CASE("reconstruct_from_mel") {
  const auto fb = build_mel_filterbank(128, kConfig);
  GlaConfig config;
  SUBCASE("zero mel gives silence") {
    const auto out = reconstruct_from_mel(MelSpectrogram(20, 128), fb, kConfig, config, 1);
    for (double v : out) CHECK(v == 0.0);
  }
  SUBCASE("bit-identical for the same seed, different for another") {
    const auto mel = pavoc::testing::mel_of(make_utterance(2, 6000), fb, kConfig);
    const auto a = reconstruct_from_mel(mel, fb, kConfig, config, 99, 6000);
    const auto b = reconstruct_from_mel(mel, fb, kConfig, config, 99, 6000);
    const auto c = reconstruct_from_mel(mel, fb, kConfig, config, 100, 6000);
    CHECK(a == b);
    CHECK(a != c);
  }
  SUBCASE("32 fast iterations beat the random-phase start on real utterances") {
    int wins = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
      const auto x = make_utterance(1000 + trial);
      const auto mel = pavoc::testing::mel_of(x, fb, kConfig);
      GlaConfig none = config;
      none.iterations = 0;
      const auto refined = reconstruct_from_mel(mel, fb, kConfig, config, trial, x.size());
      const auto initial = reconstruct_from_mel(mel, fb, kConfig, none, trial, x.size());
      wins += mel_consistency(refined, mel, fb, kConfig) < mel_consistency(initial, mel, fb, kConfig);
    }
    CHECK(wins >= 48);  // >= 95% of 50
  }
}
