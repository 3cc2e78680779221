#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evtag {

enum class ErrorCode {
  ManifestMalformed,
  SizeMismatch,
  ChecksumMismatch,
  NonStochasticRow,
  ZeroEmbedding,
  HeterogeneousShapes,
  IoFailure,
  LengthMismatch,
  KTooLarge,
  EmptyEvidenceList,
  EmptyConfusion,
  OutOfRangeConfidence,
  InvalidArgument,
  // Invariant violations: reaching these means a pipeline bug, not bad input.
  NegativeIgnorance,
  ConservationViolation,
};

std::string_view error_code_name(ErrorCode code);

// True for codes that signal a broken internal invariant rather than bad data.
bool is_invariant_violation(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evtag
