#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "pavoc/phase_retrieval.hpp"
#include "pavoc/predictor.hpp"
#include "pavoc/rng.hpp"
#include "pavoc/sampler.hpp"

namespace {

using namespace pavoc;

std::vector<double> tone(std::size_t length) {
  CounterRng rng(1);
  std::vector<double> x(length);
  for (std::size_t n = 0; n < length; ++n)
    x[n] = 0.1 * std::sin(2.0 * M_PI * 220.0 * static_cast<double>(n) / 22050.0) + 0.01 * rng.gaussian();
  return x;
}

void BM_Stft(benchmark::State& state) {
  const auto config = StftConfig::vocoder_default();
  const auto x = tone(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Stft)->Arg(22050)->Arg(110250);

void BM_Istft(benchmark::State& state) {
  const auto config = StftConfig::vocoder_default();
  const auto x = tone(static_cast<std::size_t>(state.range(0)));
  const auto spec = stft(x, config);
  for (auto _ : state) benchmark::DoNotOptimize(istft(spec, config, x.size()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Istft)->Arg(22050)->Arg(110250);

void BM_GriffinLim(benchmark::State& state) {
  const auto config = StftConfig::vocoder_default();
  const auto x = tone(22050);
  const auto target = magnitude(stft(x, config));
  GlaConfig gla;
  gla.iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(griffin_lim(target, config, gla, x.size()));
}
BENCHMARK(BM_GriffinLim)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const auto config = StftConfig::vocoder_default();
  const auto fb = build_mel_filterbank(128, config);
  const auto x = tone(22050);
  const auto mel = apply_mel(magnitude(stft(x, config)), fb);
  const auto schedule = NoiseSchedule::geometric();
  ZeroPredictor predictor;
  SamplerConfig sampler;
  sampler.variant = static_cast<SamplerVariant>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate(mel, fb, predictor, schedule, sampler, x.size()));
  state.SetLabel(std::string(to_string(sampler.variant)));
}
BENCHMARK(BM_Generate)
    ->Arg(static_cast<int>(SamplerVariant::plain))
    ->Arg(static_cast<int>(SamplerVariant::corrected))
    ->Arg(static_cast<int>(SamplerVariant::per_step_gla_baseline))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
