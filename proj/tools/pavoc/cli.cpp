#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "pavoc/audio_io.hpp"
#include "pavoc/errors.hpp"
#include "pavoc/phase_retrieval.hpp"
#include "pavoc/sampler.hpp"

#ifndef PAVOC_VERSION
#define PAVOC_VERSION "unknown"
#endif

namespace pavoc::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Options shared by every subcommand; unset ones leave the config untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::string> variant;
  std::optional<std::size_t> stage1_end;
  std::optional<std::string> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> gla_iters;
  std::optional<double> gla_momentum;
  std::string predictor;
  bool log_mel = false;
  std::string out;
  std::optional<std::string> reference_dir;
  std::size_t repetitions = 3;
  std::vector<std::string> variants{"plain", "corrected", "baseline"};
  std::string oracle_mode = "both";
  std::vector<std::string> inputs;
  std::string manifest;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig config = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  auto& s = config.sampler;
  if (o.variant) s.variant = parse_variant(*o.variant);
  if (o.stage1_end) s.stage1_end = *o.stage1_end;
  if (o.sigma) s.sigma_mode = parse_sigma_mode(*o.sigma);
  if (o.seed) s.seed = *o.seed;
  if (o.gla_iters) s.gla.iterations = *o.gla_iters;
  if (o.gla_momentum) s.gla.momentum = *o.gla_momentum;
  try {
    s.gla.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
  config.validate();
  return config;
}

std::vector<fs::path> input_paths(const Overrides& o) { return {o.inputs.begin(), o.inputs.end()}; }

fs::path output_dir(const Overrides& o) {
  if (o.out.empty()) throw ConfigurationError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

fs::path output_file(const fs::path& dir, const fs::path& input, const char* extension) {
  auto name = input.stem();
  name += extension;
  return dir / name;
}

// Per-file failures of a batch; the earliest input that failed decides the exit code.
class Failures {
 public:
  explicit Failures(std::size_t n) : codes_(n, kOk) {}
  void record(std::size_t index, const std::string& what, const std::exception& e) {
    std::lock_guard lock(mutex_);
    const std::string message = e.what();
    std::cerr << "pavoc: " << (message.starts_with(what) ? message : what + ": " + message) << "\n";
    codes_[index] = exit_code_for(e);
  }
  int code() const {
    for (int c : codes_)
      if (c != kOk) return c;
    return kOk;
  }

 private:
  std::mutex mutex_;
  std::vector<int> codes_;
};

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& argv,
                    const RunConfig& config, const std::vector<fs::path>& inputs, const std::string& started,
                    const std::vector<fs::path>& outputs) {
  json m;
  m["tool"] = "pavoc";
  m["version"] = PAVOC_VERSION;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = json::parse(to_json(config));
  m["seed"] = config.sampler.seed;
  m["inputs"] = json::array();
  for (const auto& p : inputs) m["inputs"].push_back(p.string());
  m["outputs"] = json::array();
  for (const auto& p : outputs) m["outputs"].push_back(p.string());
  m["started"] = started;
  m["finished"] = utc_now();
  std::ofstream(dir / (command + ".manifest.json")) << m.dump(2) << "\n";
}

void write_csv(const fs::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  out << metric_csv_header() << "\n";
  for (const auto& r : rows) out << format_metric_row(r) << "\n";
}

// Keeps successful rows in input order regardless of worker scheduling.
std::vector<MetricRow> compact(std::vector<std::optional<MetricRow>>& rows) {
  std::vector<MetricRow> out;
  for (auto& r : rows)
    if (r) out.push_back(std::move(*r));
  return out;
}

int cmd_analyze(const Overrides& o, const std::vector<std::string>& argv) {
  const auto started = utc_now();
  const RunConfig config = resolve_config(o);
  const auto dir = output_dir(o);
  const auto inputs = input_paths(o);
  Failures failures(inputs.size());
  std::vector<fs::path> outputs(inputs.size());
  parallel_for(inputs.size(), worker_threads(), [&](std::size_t i) {
    try {
      const auto wav = read_wav(inputs[i]);
      StftConfig analysis = config.sampler.stft;
      analysis.sample_rate = wav.sample_rate;
      const auto& fb = filterbank_for(config, wav.sample_rate);
      MelFile file{apply_mel(magnitude(stft(wav.samples, analysis)), fb), static_cast<float>(wav.sample_rate),
                   static_cast<std::uint32_t>(analysis.hop_length)};
      outputs[i] = output_file(dir, inputs[i], ".melb");
      write_melb(outputs[i], file);
    } catch (const std::exception& e) {
      failures.record(i, inputs[i].string(), e);
    }
  });
  write_manifest(dir, "analyze", argv, config, inputs, started, outputs);
  return failures.code();
}

// Shared by reconstruct and generate: one wav and one CSV row per input.
template <typename Produce>
int synthesize_batch(const Overrides& o, const std::vector<std::string>& argv, const std::string& command,
                     Produce&& produce) {
  const auto started = utc_now();
  const RunConfig config = resolve_config(o);
  std::optional<PredictorSpec> spec;
  if (command == "generate") {
    if (o.predictor.empty()) throw ConfigurationError("generate needs --predictor");
    spec = parse_predictor_spec(o.predictor);
    spec->log_mel = o.log_mel;
  }
  const auto dir = output_dir(o);
  const auto inputs = input_paths(o);
  std::optional<fs::path> ref_dir;
  if (o.reference_dir) ref_dir = *o.reference_dir;
  const auto jobs = pair_with_references(inputs, ref_dir);

  Failures failures(jobs.size());
  std::vector<std::optional<MetricRow>> rows(jobs.size());
  std::vector<fs::path> outputs(jobs.size());
  parallel_for(jobs.size(), worker_threads(), [&](std::size_t i) {
    try {
      const auto job = load_job(jobs[i], config);
      const auto& fb = filterbank_for(config, job.stft.sample_rate);
      auto outcome = produce(job, config, fb, spec);
      outputs[i] = output_file(dir, jobs[i].input, ".wav");
      write_wav(outputs[i], outcome.waveform, job.stft.sample_rate);
      rows[i] = std::move(outcome.row);
    } catch (const std::exception& e) {
      failures.record(i, jobs[i].input.string(), e);
    }
  });
  write_csv(dir / (command + ".csv"), compact(rows));
  write_manifest(dir, command, argv, config, inputs, started, outputs);
  return failures.code();
}

int cmd_reconstruct(const Overrides& o, const std::vector<std::string>& argv) {
  return synthesize_batch(o, argv, "reconstruct",
                          [](const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb, const auto&) {
                            return reconstruct_one(job, config, fb);
                          });
}

int cmd_generate(const Overrides& o, const std::vector<std::string>& argv) {
  return synthesize_batch(o, argv, "generate",
                          [](const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb,
                             const std::optional<PredictorSpec>& spec) {
                            auto model = make_predictor(*spec, job, config.schedule);
                            return generate_one(job, config, fb, *model);
                          });
}

int cmd_oracle_eval(const Overrides& o, const std::vector<std::string>& argv) {
  const auto started = utc_now();
  RunConfig config = resolve_config(o);
  config.sampler.variant = SamplerVariant::corrected;
  auto spec = parse_predictor_spec(o.predictor.empty() ? "degraded:@ref:10" : o.predictor);
  spec.log_mel = o.log_mel;
  if (o.oracle_mode != "both" && o.oracle_mode != "oracle_spec" && o.oracle_mode != "oracle_phase")
    throw ConfigurationError("--mode must be oracle_spec, oracle_phase or both");
  const auto dir = output_dir(o);
  const auto inputs = input_paths(o);

  Failures failures(inputs.size());
  std::vector<MetricRow> rows;
  std::vector<fs::path> outputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& input = inputs[i];
    try {
      const auto wav = read_wav(input);
      LoadedJob job;
      job.input = input;
      job.stft = config.sampler.stft;
      job.stft.sample_rate = wav.sample_rate;
      const auto& fb = filterbank_for(config, wav.sample_rate);
      const std::size_t frames = job.stft.frame_count(wav.samples.size());
      if (frames < 2) throw ParseError(input.string() + ": too short");
      job.length = (frames - 1) * job.stft.hop_length;
      job.reference = wav.samples;
      job.reference.resize(job.length, 0.0);
      job.seed = file_seed(config.sampler.seed, input);
      job.mel = apply_mel(magnitude(stft(job.reference, job.stft)), fb);

      for (const char* mode : {"oracle_spec", "oracle_phase"}) {
        if (o.oracle_mode != "both" && o.oracle_mode != mode) continue;
        const auto x_tilde = std::string(mode) == "oracle_spec"
                                 ? oracle_spec_estimate(job.reference, job.stft, config.sampler.gla, job.seed)
                                 : oracle_phase_estimate(job.reference, job.mel, fb, job.stft);
        auto model = make_predictor(spec, job, config.schedule);
        SamplerConfig sampler = config.sampler;
        sampler.seed = job.seed;
        sampler.stft = job.stft;
        const auto result =
            generate(job.mel, fb, *model, config.schedule, sampler, job.length, std::span<const double>(x_tilde));
        MetricRow row;
        row.path = input.string();
        row.variant = mode;
        row.stage1_end = sampler.stage1_end;
        row.report = evaluate(result.waveform, job.mel, fb, job.stft, std::span<const double>(job.reference));
        rows.push_back(row);
        auto out = dir / input.stem();
        out += std::string(".") + mode + ".wav";
        write_wav(out, result.waveform, wav.sample_rate);
        outputs.push_back(out);
      }
    } catch (const std::exception& e) {
      failures.record(i, input.string(), e);
    }
  }
  write_csv(dir / "oracle-eval.csv", rows);
  for (const auto& r : rows) std::cout << format_metric_row(r) << "\n";
  write_manifest(dir, "oracle-eval", argv, config, inputs, started, outputs);
  return failures.code();
}

int cmd_sweep(const Overrides& o, const std::vector<std::string>& argv) {
  const auto started = utc_now();
  const RunConfig config = resolve_config(o);
  if (o.predictor.empty()) throw ConfigurationError("sweep needs --predictor");
  auto spec = parse_predictor_spec(o.predictor);
  spec.log_mel = o.log_mel;
  const auto dir = output_dir(o);
  const auto inputs = input_paths(o);
  std::optional<fs::path> ref_dir;
  if (o.reference_dir) ref_dir = *o.reference_dir;

  const auto report = run_sweep(pair_with_references(inputs, ref_dir), config, spec, worker_threads());
  write_csv(dir / "sweep.csv", report.rows);
  const auto text = format_histograms(report);
  std::ofstream(dir / "histogram.txt") << text;
  std::cout << text;
  int code = kOk;
  for (const auto& f : report.failures) {
    std::cerr << "pavoc: " << f.path << " @ stage1_end " << f.stage1_end << ": " << f.error << "\n";
    if (code == kOk) code = f.code;
  }
  write_manifest(dir, "sweep", argv, config, inputs, started, {dir / "sweep.csv", dir / "histogram.txt"});
  return code;
}

int cmd_bench(const Overrides& o, const std::vector<std::string>& argv) {
  const auto started = utc_now();
  const RunConfig config = resolve_config(o);
  auto spec = parse_predictor_spec(o.predictor.empty() ? "zero" : o.predictor);
  spec.log_mel = o.log_mel;
  std::vector<SamplerVariant> variants;
  for (const auto& v : o.variants) variants.push_back(parse_variant(v));
  const auto inputs = input_paths(o);
  std::optional<fs::path> ref_dir;
  if (o.reference_dir) ref_dir = *o.reference_dir;

  const auto entries = run_bench(pair_with_references(inputs, ref_dir), config, variants, spec, o.repetitions);
  const auto table = format_bench_table(entries);
  std::cout << table;
  if (!o.out.empty()) {
    const auto dir = output_dir(o);
    std::ofstream csv(dir / "bench.csv");
    csv << "variant,rtf,median_s,min_s,max_s,repetitions,audio_s\n";
    for (const auto& e : entries)
      csv << to_string(e.variant) << "," << e.measurement.rtf << "," << e.measurement.median_seconds << ","
          << e.measurement.min_seconds << "," << e.measurement.max_seconds << "," << e.measurement.samples.size()
          << "," << e.audio_seconds << "\n";
    write_manifest(dir, "bench", argv, config, inputs, started, {dir / "bench.csv"});
  }
  return kOk;
}

int cmd_replay(const Overrides& o) {
  std::ifstream in(o.manifest);
  if (!in) throw ParseError("cannot open manifest " + o.manifest);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw ParseError("manifest has no argv");
  auto args = m["argv"].get<std::vector<std::string>>();
  if (args.size() < 2 || args[1] == "replay") throw ParseError("manifest argv is not replayable");
  std::vector<char*> ptrs;
  for (auto& a : args) ptrs.push_back(a.data());
  return run(static_cast<int>(ptrs.size()), ptrs.data());
}

}  // namespace

int run(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  Overrides o;
  CLI::App app{"Phase-aware diffusion vocoder tools"};
  app.set_version_flag("--version", PAVOC_VERSION);
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Base seed; each file uses seed ^ fnv1a64(basename)");
    sub->add_option("--gla-iters", o.gla_iters, "Griffin-Lim iterations");
    sub->add_option("--gla-momentum", o.gla_momentum, "Fast Griffin-Lim momentum in [0, 1)");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto sampling = [&](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "plain, baseline or corrected");
    sub->add_option("--stage1-end", o.stage1_end, "Last step of stage 2 (0..T)");
    sub->add_option("--sigma", o.sigma, "ddpm or ddim0");
    sub->add_option("--predictor", o.predictor,
                    "zero | oracle:<wav> | degraded:<wav>:<snr_db> | external:<command>; <wav> may be @ref");
    sub->add_flag("--log-mel", o.log_mel, "Send log10 mel to external predictors");
    sub->add_option("--reference-dir", o.reference_dir, "Directory holding <stem>.wav references");
  };

  auto* analyze = app.add_subcommand("analyze", "WAV -> MELB");
  common(analyze);
  analyze->add_option("inputs", o.inputs, "WAV files")->required();

  auto* reconstruct = app.add_subcommand("reconstruct", "MELB -> WAV with fast Griffin-Lim only");
  common(reconstruct);
  reconstruct->add_option("--reference-dir", o.reference_dir, "Directory holding <stem>.wav references");
  reconstruct->add_option("inputs", o.inputs, "MELB files")->required();

  auto* gen = app.add_subcommand("generate", "MELB -> WAV with the diffusion sampler");
  common(gen);
  sampling(gen);
  gen->add_option("inputs", o.inputs, "MELB files")->required();

  auto* oracle = app.add_subcommand("oracle-eval", "Corrected generation with oracle spectrogram or phase estimates");
  common(oracle);
  sampling(oracle);
  oracle->add_option("--mode", o.oracle_mode, "oracle_spec, oracle_phase or both");
  oracle->add_option("inputs", o.inputs, "Reference WAV files")->required();

  auto* sweep = app.add_subcommand("sweep", "Corrected generation at every stage-1 endpoint");
  common(sweep);
  sampling(sweep);
  sweep->add_option("inputs", o.inputs, "MELB files")->required();

  auto* bench = app.add_subcommand("bench", "Real-time factor per sampler variant");
  common(bench);
  sampling(bench);
  bench->add_option("--repetitions", o.repetitions, "Timed passes per variant")->check(CLI::PositiveNumber);
  bench->add_option("--variants", o.variants, "Variants to time")->delimiter(',');
  bench->add_option("inputs", o.inputs, "MELB files")->required();

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", o.manifest, "Manifest JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*analyze) return cmd_analyze(o, args);
    if (*reconstruct) return cmd_reconstruct(o, args);
    if (*gen) return cmd_generate(o, args);
    if (*oracle) return cmd_oracle_eval(o, args);
    if (*sweep) return cmd_sweep(o, args);
    if (*bench) return cmd_bench(o, args);
    if (*replay) return cmd_replay(o);
  } catch (const std::exception& e) {
    std::cerr << "pavoc: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace pavoc::cli
