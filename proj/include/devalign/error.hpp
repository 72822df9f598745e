#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace devalign {

enum class ErrorCode {
  IndexOutOfRange,
  InvalidEpoch,
  InvalidLevel,
  InvalidArgument,
  PlacementFailure,
  UnsupportedSet,
  IoFailure,
  FormatError,
  ZeroVector,
  NonFinite,
  DuplicateId,
  DimensionMismatch,
  DuplicateConcept,
  MissingNumerosity,
  DegenerateVariance,
  DegenerateMatrix,
  FitFailure,
  InconsistentStores,
  LengthMismatch,
  InsufficientOverlap,
};

std::string_view code_name(ErrorCode code) noexcept;

// All recoverable failures surface as this exception. `detail` is free text
// (file/line, offending id, ...) and never contains tabs or newlines.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace devalign
