#pragma once

#include <stdexcept>
#include <string>

namespace pavoc {

/// Invalid configuration: COLA violation, bad schedule, inconsistent sampler settings.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix is (numerically) rank deficient; the message says how to recover.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (WAV, MELB, config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base for everything a NoisePredictor can raise.
class PredictorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// External predictor process exited, timed out or never answered the handshake.
class PredictorUnavailable : public PredictorError {
 public:
  using PredictorError::PredictorError;
};

/// Wire frame with unknown magic or truncated payload.
class ProtocolError : public PredictorError {
 public:
  using PredictorError::PredictorError;
};

/// Predictor returned something that breaks the interface contract (length, NaN).
class ContractViolation : public PredictorError {
 public:
  using PredictorError::PredictorError;
};

}  // namespace pavoc
