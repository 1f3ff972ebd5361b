#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pavoc/metrics.hpp"
#include "pavoc/predictor.hpp"
#include "pavoc/run_config.hpp"

namespace pavoc::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kPredictorError = 3, kConfigError = 4 };

/// Maps an exception from a command to its exit code.
ExitCode exit_code_for(const std::exception& e);

/// zero | oracle:<wav> | degraded:<wav>:<snr_db> | external:<command line>.
/// A wav of "@ref" stands for the reference paired with each input.
struct PredictorSpec {
  enum class Kind { zero, oracle, degraded, external };
  Kind kind = Kind::zero;
  std::string reference;
  double snr_db = kNoPerturbation;
  std::string command;
  bool log_mel = false;

  bool uses_reference() const { return kind == Kind::oracle || kind == Kind::degraded; }
};

/// Throws ConfigurationError on an unknown form.
PredictorSpec parse_predictor_spec(std::string_view text);

/// seed ^ fnv1a64(basename of path).
std::uint64_t file_seed(std::uint64_t seed, const std::filesystem::path& path);

/// Runs fn(i) for every i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Number of worker threads: PAVOC_THREADS if set and positive, else hardware concurrency.
unsigned worker_threads();

/// One input of a batch command. `reference` is optional except for
/// predictors that need one.
struct FileJob {
  std::filesystem::path input;
  std::optional<std::filesystem::path> reference;
};

/// Pairs each MELB with `<stem>.wav` in `reference_dir` (or next to it) when that file exists.
std::vector<FileJob> pair_with_references(const std::vector<std::filesystem::path>& inputs,
                                          const std::optional<std::filesystem::path>& reference_dir);

/// Filterbank for `config` at `sample_rate`; built once per rate and shared.
const MelFilterbank& filterbank_for(const RunConfig& config, unsigned sample_rate);

/// Per-file state shared by generate, sweep and bench.
struct LoadedJob {
  std::filesystem::path input;
  MelSpectrogram mel;
  std::size_t length = 0;           // (frames - 1) * hop
  std::vector<double> reference;    // trimmed or zero-padded to length; empty if none
  std::uint64_t seed = 0;
  StftConfig stft;
};

LoadedJob load_job(const FileJob& job, const RunConfig& config);

std::unique_ptr<NoisePredictor> make_predictor(const PredictorSpec& spec, const LoadedJob& job,
                                               const NoiseSchedule& schedule);

struct GenerateOutcome {
  std::vector<double> waveform;
  MetricRow row;
};

/// Generates one file with config.sampler (seed replaced by the job's seed)
/// and scores it; rtf is that single run's real-time factor.
GenerateOutcome generate_one(const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb,
                             NoisePredictor& predictor);

/// Fast-GLA reconstruction of one file at the job's seed.
GenerateOutcome reconstruct_one(const LoadedJob& job, const RunConfig& config, const MelFilterbank& fb);

/// x~ from GLA on the true magnitude |stft(reference)|, random phase from `seed`.
std::vector<double> oracle_spec_estimate(std::span<const double> reference, const StftConfig& stft_config,
                                         const GlaConfig& gla, std::uint64_t seed);

/// x~ from one inverse STFT of the pseudo-inverse magnitude under the true phase.
std::vector<double> oracle_phase_estimate(std::span<const double> reference, const MelSpectrogram& mel,
                                          const MelFilterbank& fb, const StftConfig& stft_config);

struct SweepFailure {
  std::string path;
  std::size_t stage1_end = 0;
  std::string error;
  ExitCode code = kInputError;
};

/// Optimal endpoint per file for one metric, with tied endpoints listed.
struct EndpointChoice {
  std::string path;
  std::size_t endpoint = 0;
  std::vector<std::size_t> tied;  // every endpoint sharing the optimum, ascending
};

struct MetricHistogram {
  std::string metric;
  bool maximize = false;
  std::vector<std::size_t> counts;  // index = endpoint, size T+1
  std::vector<EndpointChoice> choices;
};

struct SweepReport {
  std::vector<MetricRow> rows;
  std::vector<SweepFailure> failures;
  std::vector<MetricHistogram> histograms;  // metrics that had values
};

/// Runs the corrected sampler at every stage1_end in 0..T for each job.
SweepReport run_sweep(const std::vector<FileJob>& jobs, const RunConfig& config, const PredictorSpec& predictor,
                      unsigned threads);

std::string format_histograms(const SweepReport& report);

struct BenchEntry {
  SamplerVariant variant;
  RtfMeasurement measurement;
  double audio_seconds = 0.0;
};

/// Times a full pass over the batch per variant, `repetitions` times each,
/// with the same predictor spec and seeds for every variant. Serial.
std::vector<BenchEntry> run_bench(const std::vector<FileJob>& jobs, const RunConfig& config,
                                  const std::vector<SamplerVariant>& variants, const PredictorSpec& predictor,
                                  std::size_t repetitions);

std::string format_bench_table(const std::vector<BenchEntry>& entries);

/// Parses argv and runs a subcommand. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace pavoc::cli
