#pragma once

#include <stdexcept>
#include <string>

namespace satflow {

// Numeric values are part of the C ABI (see satflow.h, sf_status).
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  non_positive_interior = 2,
  integral_diverged = 3,
  anchor_invalid = 4,
  unknown_family = 5,
  bad_parameter = 6,
  out_of_range = 7,
  energy_infinite = 8,
  singular_evaluation = 9,
  newton_diverged = 10,
  bound_violation = 11,
  step_failed = 12,
  mass_out_of_range = 13,
  bracket_failed = 14,
  non_unique_plateau = 15,
  support_overflow = 16,
  no_convergence = 17,
  refinement_mismatch = 18,
  parse_error = 19,
  validation_error = 20,
  io_error = 21,
  internal = 99,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace satflow
