#pragma once

#include <stdexcept>
#include <string>

namespace parabulk {

enum class ErrorCode {
  invalid_argument,
  parse,
  validation,
  grid_too_small,
  shape_mismatch,
  not_mean_zero,
  forcing_not_mean_zero,
  not_affine_far_field,
  negative_intercept,
  solver_diverged,
  newton_stalled,
  mismatched_runs,
  wrong_geometry,
  io,
  check_failed,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace parabulk
