#include "commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "pavoc/audio_io.hpp"
#include "pavoc/errors.hpp"
#include "pavoc/external_predictor.hpp"
#include "pavoc/phase_retrieval.hpp"
#include "pavoc/rng.hpp"
#include "pavoc/sampler.hpp"

namespace pavoc::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MetricReport score(std::span<const double> waveform, const LoadedJob& job, const MelFilterbank& fb) {
  if (job.reference.empty()) return evaluate(waveform, job.mel, fb, job.stft);
  return evaluate(waveform, job.mel, fb, job.stft, std::span<const double>(job.reference));
}

std::optional<double> metric_value(const MetricReport& r, std::size_t which) {
  switch (which) {
    case 0: return r.spectral_convergence;
    case 1: return r.log_spectral_distance_db;
    case 2: return r.snr_db;
    default: return r.mel_consistency;
  }
}

constexpr std::array<const char*, 4> kMetricNames{"spectral_convergence", "lsd_db", "snr_db", "mel_consistency"};

}  // namespace

ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PredictorError*>(&e)) return kPredictorError;
  if (dynamic_cast<const ConfigurationError*>(&e) || dynamic_cast<const RankDeficiencyError*>(&e)) return kConfigError;
  return kInputError;
}

PredictorSpec parse_predictor_spec(std::string_view text) {
  PredictorSpec spec;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "zero" && rest.empty()) {
    spec.kind = PredictorSpec::Kind::zero;
  } else if (kind == "oracle" && !rest.empty()) {
    spec.kind = PredictorSpec::Kind::oracle;
    spec.reference = rest;
  } else if (kind == "degraded") {
    const auto last = rest.rfind(':');
    if (last == std::string_view::npos || last == 0)
      throw ConfigurationError("degraded predictor needs degraded:<wav>:<snr_db>");
    spec.kind = PredictorSpec::Kind::degraded;
    spec.reference = rest.substr(0, last);
    const std::string snr(rest.substr(last + 1));
    char* end = nullptr;
    spec.snr_db = std::strtod(snr.c_str(), &end);
    if (snr.empty() || *end != '\0' || std::isnan(spec.snr_db))
      throw ConfigurationError("degraded predictor: bad snr '" + snr + "'");
  } else if (kind == "external" && !rest.empty()) {
    spec.kind = PredictorSpec::Kind::external;
    spec.command = rest;
  } else {
    throw ConfigurationError("unknown predictor spec '" + std::string(text) +
                             "' (expected zero, oracle:<wav>, degraded:<wav>:<snr_db> or external:<command>)");
  }
  return spec;
}

std::uint64_t file_seed(std::uint64_t seed, const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  return seed ^ fnv1a64({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

unsigned worker_threads() {
  if (const char* env = std::getenv("PAVOC_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<FileJob> pair_with_references(const std::vector<std::filesystem::path>& inputs,
                                          const std::optional<std::filesystem::path>& reference_dir) {
  std::vector<FileJob> jobs;
  for (const auto& input : inputs) {
    FileJob job{input, std::nullopt};
    const auto dir = reference_dir ? *reference_dir : input.parent_path();
    auto candidate = dir / input.stem();
    candidate += ".wav";
    if (std::filesystem::exists(candidate)) job.reference = candidate;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

const MelFilterbank& filterbank_for(const RunConfig& config, unsigned sample_rate) {
  struct Key {
    std::size_t bands, n_fft, win, hop;
    unsigned sr;
    double f_min, f_max;
    auto operator<=>(const Key&) const = default;
  };
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<MelFilterbank>> cache;
  StftConfig stft = config.sampler.stft;
  stft.sample_rate = sample_rate;
  const Key key{config.mel_bands, stft.n_fft, stft.win_length, stft.hop_length, sample_rate, config.f_min, config.f_max};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<MelFilterbank>(build_mel_filterbank(config.mel_bands, stft, config.f_min, config.f_max));
  return *slot;
}

LoadedJob load_job(const FileJob& file, const RunConfig& config) {
  auto melb = read_melb(file.input);
  LoadedJob job;
  job.input = file.input;
  job.stft = config.sampler.stft;
  job.stft.sample_rate = static_cast<unsigned>(std::lround(melb.sample_rate));
  if (melb.hop_length != job.stft.hop_length)
    throw ConfigurationError(file.input.string() + ": hop " + std::to_string(melb.hop_length) +
                             " does not match configured hop " + std::to_string(job.stft.hop_length));
  if (melb.mel.bands() != config.mel_bands)
    throw ConfigurationError(file.input.string() + ": " + std::to_string(melb.mel.bands()) +
                             " mel bands, configuration expects " + std::to_string(config.mel_bands));
  if (melb.mel.frames() < 2) throw ParseError(file.input.string() + ": need at least two frames");
  job.mel = std::move(melb.mel);
  job.length = (job.mel.frames() - 1) * job.stft.hop_length;
  job.seed = file_seed(config.sampler.seed, file.input);
  if (file.reference) {
    auto wav = read_wav(*file.reference);
    if (wav.sample_rate != job.stft.sample_rate)
      throw ParseError(file.reference->string() + ": sample rate " + std::to_string(wav.sample_rate) +
                       " differs from the mel's " + std::to_string(job.stft.sample_rate));
    wav.samples.resize(job.length, 0.0);
    job.reference = std::move(wav.samples);
  }
  return job;
}

std::unique_ptr<NoisePredictor> make_predictor(const PredictorSpec& spec, const LoadedJob& job,
                                               const NoiseSchedule& schedule) {
  auto reference = [&] {
    if (spec.reference == "@ref") {
      if (job.reference.empty()) throw ParseError(job.input.string() + ": predictor needs a paired reference wav");
      return job.reference;
    }
    auto samples = read_wav(spec.reference).samples;
    samples.resize(job.length, 0.0);
    return samples;
  };
  switch (spec.kind) {
    case PredictorSpec::Kind::zero: return std::make_unique<ZeroPredictor>();
    case PredictorSpec::Kind::oracle: return std::make_unique<OraclePredictor>(reference(), schedule);
    case PredictorSpec::Kind::degraded:
      return std::make_unique<DegradedOraclePredictor>(reference(), schedule, spec.snr_db, job.seed);
    case PredictorSpec::Kind::external: {
      ExternalPredictorOptions options;
      options.log_mel = spec.log_mel;
      return std::make_unique<ExternalPredictor>(spec.command, options);
    }
  }
  throw ConfigurationError("unhandled predictor kind");
}

GenerateOutcome generate_one(const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb,
                             NoisePredictor& predictor) {
  SamplerConfig sampler = config.sampler;
  sampler.seed = job.seed;
  sampler.stft = job.stft;
  const auto start = Clock::now();
  auto result = generate(job.mel, fb, predictor, config.schedule, sampler, job.length);
  const double elapsed = seconds_since(start);

  GenerateOutcome out;
  out.row.path = job.input.string();
  out.row.variant = to_string(sampler.variant);
  out.row.stage1_end = sampler.stage1_end;
  out.row.report = score(result.waveform, job, fb);
  out.row.rtf = static_cast<double>(job.length) / job.stft.sample_rate / elapsed;
  out.waveform = std::move(result.waveform);
  return out;
}

GenerateOutcome reconstruct_one(const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb) {
  const auto start = Clock::now();
  auto waveform = reconstruct_from_mel(job.mel, fb, job.stft, config.sampler.gla, job.seed, job.length);
  const double elapsed = seconds_since(start);

  GenerateOutcome out;
  out.row.path = job.input.string();
  out.row.variant = "gla";
  out.row.stage1_end = 0;
  out.row.report = score(waveform, job, fb);
  out.row.rtf = static_cast<double>(job.length) / job.stft.sample_rate / elapsed;
  out.waveform = std::move(waveform);
  return out;
}

std::vector<double> oracle_spec_estimate(std::span<const double> reference, const StftConfig& stft_config,
                                         const GlaConfig& gla, std::uint64_t seed) {
  GlaConfig config = gla;
  config.phase_init = RandomPhase{seed};
  return griffin_lim(magnitude(stft(reference, stft_config)), stft_config, config, reference.size());
}

std::vector<double> oracle_phase_estimate(std::span<const double> reference, const MelSpectrogram& mel,
                                          const MelFilterbank& fb, const StftConfig& stft_config) {
  const auto phase = stft(reference, stft_config);
  return istft(project_magnitude(phase, estimate_magnitude(mel, fb)), stft_config, reference.size());
}

SweepReport run_sweep(const std::vector<FileJob>& jobs, const RunConfig& config, const PredictorSpec& predictor,
                      unsigned threads) {
  const std::size_t endpoints = config.schedule.steps() + 1;
  struct PerFile {
    std::vector<std::optional<MetricRow>> rows;
    std::vector<SweepFailure> failures;
  };
  std::vector<PerFile> results(jobs.size());

  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    auto& out = results[i];
    out.rows.resize(endpoints);
    const std::string path = jobs[i].input.string();
    try {
      const auto job = load_job(jobs[i], config);
      const auto& fb = filterbank_for(config, job.stft.sample_rate);
      auto model = make_predictor(predictor, job, config.schedule);
      for (std::size_t e = 0; e < endpoints; ++e) {
        RunConfig at = config;
        at.sampler.variant = SamplerVariant::corrected;
        at.sampler.stage1_end = e;
        try {
          out.rows[e] = generate_one(job, at, fb, *model).row;
        } catch (const PredictorError& err) {
          // The handle may be unusable now; start a fresh one for the next endpoint.
          out.failures.push_back({path, e, err.what(), exit_code_for(err)});
          model = make_predictor(predictor, job, config.schedule);
        } catch (const std::exception& err) {
          out.failures.push_back({path, e, err.what(), exit_code_for(err)});
        }
      }
    } catch (const std::exception& err) {
      for (std::size_t e = 0; e < endpoints; ++e)
        if (!out.rows[e]) out.failures.push_back({path, e, err.what(), exit_code_for(err)});
    }
  });

  SweepReport report;
  for (auto& file : results) {
    for (auto& row : file.rows)
      if (row) report.rows.push_back(*row);
    for (auto& f : file.failures) report.failures.push_back(std::move(f));
  }

  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    MetricHistogram hist;
    hist.metric = kMetricNames[m];
    hist.maximize = m == 2;
    hist.counts.assign(endpoints, 0);
    for (const auto& file : results) {
      std::optional<double> best;
      EndpointChoice choice;
      for (std::size_t e = 0; e < endpoints; ++e) {
        if (!file.rows[e]) continue;
        const auto v = metric_value(file.rows[e]->report, m);
        if (!v || std::isnan(*v)) continue;
        choice.path = file.rows[e]->path;
        const bool better = !best || (hist.maximize ? *v > *best : *v < *best);
        if (better) {
          best = v;
          choice.tied = {e};
        } else if (*v == *best) {
          choice.tied.push_back(e);
        }
      }
      if (!best) continue;
      choice.endpoint = choice.tied.front();  // ties go to the smaller endpoint
      ++hist.counts[choice.endpoint];
      hist.choices.push_back(std::move(choice));
    }
    if (!hist.choices.empty()) report.histograms.push_back(std::move(hist));
  }
  return report;
}

std::string format_histograms(const SweepReport& report) {
  std::ostringstream out;
  for (const auto& h : report.histograms) {
    out << h.metric << " (" << (h.maximize ? "argmax" : "argmin") << " endpoint per file, " << h.choices.size()
        << " files)\n";
    std::size_t widest = 1;
    for (auto c : h.counts) widest = std::max(widest, c);
    for (std::size_t e = 0; e < h.counts.size(); ++e) {
      const std::size_t bar = h.counts[e] * 40 / widest;
      char label[32];
      std::snprintf(label, sizeof label, "  %2zu | %4zu ", e, h.counts[e]);
      out << label << std::string(bar, '#') << "\n";
    }
    for (const auto& c : h.choices) {
      if (c.tied.size() < 2) continue;
      out << "  tie " << c.path << ":";
      for (auto e : c.tied) out << " " << e;
      out << " -> " << c.endpoint << "\n";
    }
  }
  return out.str();
}

std::vector<BenchEntry> run_bench(const std::vector<FileJob>& jobs, const RunConfig& config,
                                  const std::vector<SamplerVariant>& variants, const PredictorSpec& predictor,
                                  std::size_t repetitions) {
  if (jobs.empty()) throw ParseError("bench needs at least one input");
  std::vector<LoadedJob> loaded;
  std::vector<std::unique_ptr<NoisePredictor>> models;
  double seconds = 0.0;
  for (const auto& file : jobs) {
    loaded.push_back(load_job(file, config));
    models.push_back(make_predictor(predictor, loaded.back(), config.schedule));
    seconds += static_cast<double>(loaded.back().length) / loaded.back().stft.sample_rate;
  }

  std::vector<BenchEntry> entries;
  for (auto variant : variants) {
    SamplerConfig sampler = config.sampler;
    sampler.variant = variant;
    auto batch = [&] {
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        const auto& job = loaded[i];
        SamplerConfig s = sampler;
        s.seed = job.seed;
        s.stft = job.stft;
        generate(job.mel, filterbank_for(config, job.stft.sample_rate), *models[i], config.schedule, s, job.length);
      }
    };
    entries.push_back({variant, measure_rtf(batch, seconds, repetitions), seconds});
  }
  return entries;
}

std::string format_bench_table(const std::vector<BenchEntry>& entries) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %12s %12s %12s %5s\n", "variant", "rtf", "median_s", "min_s", "max_s",
                "reps");
  out << line;
  for (const auto& e : entries) {
    const auto& m = e.measurement;
    std::snprintf(line, sizeof line, "%-10s %10.3f %12.6f %12.6f %12.6f %5zu\n", std::string(to_string(e.variant)).c_str(),
                  m.rtf, m.median_seconds, m.min_seconds, m.max_seconds, m.samples.size());
    out << line;
  }
  return out.str();
}

}  // namespace pavoc::cli
