#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pavoc/predictor.hpp"

namespace pavoc {

struct ExternalPredictorOptions {
  std::chrono::milliseconds timeout{30000};
  /// Send log10(max(mel, 1e-5)) instead of the linear mel.
  bool log_mel = false;
};

/// Child process speaking the predictor wire protocol on stdin/stdout,
/// started with `/bin/sh -c command`. One request in flight at a time.
///
/// Errors: PredictorUnavailable (spawn failure, exit, timeout),
/// ProtocolError (unexpected magic), ContractViolation (wrong length). After
/// any error the handle is unusable and further calls raise
/// PredictorUnavailable.
class ExternalPredictor : public NoisePredictor {
 public:
  explicit ExternalPredictor(std::string command, ExternalPredictorOptions options = {});
  ~ExternalPredictor() override;
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  std::vector<double> predict(const PredictorRequest& request) override;
  bool exclusive() const override { return true; }

  int pid() const { return pid_; }
  std::uint32_t server_version() const { return server_version_; }
  const std::string& command() const { return command_; }

 private:
  void write_all(std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> read_exact(std::size_t n, std::chrono::steady_clock::time_point deadline);
  [[noreturn]] void fail_unavailable(const std::string& why);
  void shutdown();

  std::string command_;
  ExternalPredictorOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::uint32_t server_version_ = 0;
  bool broken_ = false;
  std::mutex mutex_;
};

/// Sends one request through `endpoint` and returns eps_hat.
std::vector<double> external_predict(const PredictorRequest& request, ExternalPredictor& endpoint);

}  // namespace pavoc
