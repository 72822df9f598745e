#include "devalign/error.hpp"

namespace devalign {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidEpoch: return "InvalidEpoch";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::UnsupportedSet: return "UnsupportedSet";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateConcept: return "DuplicateConcept";
    case ErrorCode::MissingNumerosity: return "MissingNumerosity";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::InconsistentStores: return "InconsistentStores";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
  }
  return "Unknown";
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(code_name(code)) + ": " + detail),
      code_(code),
      detail_(sanitize(std::move(detail))) {}

}  // namespace devalign
