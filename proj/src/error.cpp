#include "evtag/error.hpp"

namespace evtag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ManifestMalformed: return "ManifestMalformed";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::NonStochasticRow: return "NonStochasticRow";
    case ErrorCode::ZeroEmbedding: return "ZeroEmbedding";
    case ErrorCode::HeterogeneousShapes: return "HeterogeneousShapes";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyEvidenceList: return "EmptyEvidenceList";
    case ErrorCode::EmptyConfusion: return "EmptyConfusion";
    case ErrorCode::OutOfRangeConfidence: return "OutOfRangeConfidence";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeIgnorance: return "NegativeIgnorance";
    case ErrorCode::ConservationViolation: return "ConservationViolation";
  }
  return "Unknown";
}

bool is_invariant_violation(ErrorCode code) {
  return code == ErrorCode::NegativeIgnorance ||
         code == ErrorCode::ConservationViolation;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace evtag
