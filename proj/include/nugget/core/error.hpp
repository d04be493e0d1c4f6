#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nugget {

enum class ErrorCode {
  // label / payload parsing
  CountMismatch,
  UnknownToken,
  FormatViolation,
  BinaryViolation,
  UnparseablePayload,
  UnparseableLine,
  CoverageViolation,
  // judge transport and retries
  JudgeUnavailable,
  VerificationFailed,
  // retrieval
  EmbeddingServiceUnavailable,
  InsufficientLabels,
  ProviderUnavailable,
  // rubrics / verification
  EmptyGroundTruth,
  IncompleteCoverage,
  CoverageMismatch,
  // training-side utilities
  LengthMismatch,
  GroupTooSmall,
  DegenerateInput,
  // persistence and configuration
  SchemaViolation,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; `code()`
// identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

  // True for errors raised while interpreting a judge response. These are the
  // ones the judge client answers with a corrective retry.
  bool is_parse_error() const noexcept;

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nugget
