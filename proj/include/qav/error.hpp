#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qav {

enum class ErrorCode {
  invalid_argument,
  non_finite,
  zero_norm,
  dimension_mismatch,
  non_positive_quality,
  empty_set,
  insufficient_imposters,
  degenerate_points,
  cancellation,
  parse,
  duplicate_id,
  duplicate_pair,
  unknown_id,
  missing_subject_id,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure the library reports. `where()` carries a row number, batch
// index or similar position when the failing input has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> where = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> where_;
};

}  // namespace qav
