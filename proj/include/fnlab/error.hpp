#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fnlab {

enum class ErrorCode {
  ConeViolation,
  MetricNotSpd,
  NonpositiveEpsilon,
  GrowthConditionUnmet,
  InvalidFrame,
  Step1Failure,
  StencilOutOfDomain,
  UnsupportedDomain,
  LinearSolveFailure,
  NonellipticNode,
  StepCollapse,
  MaxIterations,
  ScheduleTooAggressive,
  FrameDegenerate,
  InsufficientLevels,
  CollarTooSmall,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for the error family: 2 config, 3 solver/numerics,
/// 5 IO. Condition-check failures (4) are not errors and are mapped by the
/// CLI directly.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fnlab
