#include "qav/error.hpp"

namespace qav {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::zero_norm: return "ZeroNorm";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_positive_quality: return "NonPositiveQuality";
    case ErrorCode::empty_set: return "EmptySet";
    case ErrorCode::insufficient_imposters: return "InsufficientImposters";
    case ErrorCode::degenerate_points: return "DegeneratePoints";
    case ErrorCode::cancellation: return "CancellationError";
    case ErrorCode::parse: return "Parse";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::duplicate_pair: return "DuplicatePair";
    case ErrorCode::unknown_id: return "UnknownId";
    case ErrorCode::missing_subject_id: return "MissingSubjectId";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> where) {
  std::string out{to_string(code)};
  out += ": ";
  out += message;
  if (where) {
    out += " (at ";
    out += std::to_string(*where);
    out += ")";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> where)
    : std::runtime_error(decorate(code, message, where)),
      code_(code),
      where_(where) {}

}  // namespace qav
