#include "nugget/core/error.hpp"

namespace nugget {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::FormatViolation: return "FormatViolation";
    case ErrorCode::BinaryViolation: return "BinaryViolation";
    case ErrorCode::UnparseablePayload: return "UnparseablePayload";
    case ErrorCode::UnparseableLine: return "UnparseableLine";
    case ErrorCode::CoverageViolation: return "CoverageViolation";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::EmbeddingServiceUnavailable: return "EmbeddingServiceUnavailable";
    case ErrorCode::InsufficientLabels: return "InsufficientLabels";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::IncompleteCoverage: return "IncompleteCoverage";
    case ErrorCode::CoverageMismatch: return "CoverageMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

bool Error::is_parse_error() const noexcept {
  switch (code_) {
    case ErrorCode::CountMismatch:
    case ErrorCode::UnknownToken:
    case ErrorCode::FormatViolation:
    case ErrorCode::BinaryViolation:
    case ErrorCode::UnparseablePayload:
    case ErrorCode::UnparseableLine:
    case ErrorCode::CoverageViolation:
      return true;
    default:
      return false;
  }
}

}  // namespace nugget
