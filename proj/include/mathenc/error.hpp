#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mathenc {

enum class ErrorCode {
  malformed_markup,
  unknown_format,
  missing_file,
  empty_class,
  invalid_manifest,
  duplicate_id,
  unknown_label,
  all_bags_empty,
  empty_vocabulary,
  invalid_argument,
  degenerate_input,
  single_class_training,
  dimension_mismatch,
  k_too_large,
  k_exceeds_samples,
  non_convergence,
  too_few_samples,
  length_mismatch,
  zero_variance,
  ragged_grid,
  malformed_line,
  invalid_config,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace mathenc
