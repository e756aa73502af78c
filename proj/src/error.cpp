#include "fnlab/error.hpp"

#include <charconv>

#include "fnlab/extended_real.hpp"

namespace fnlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConeViolation: return "CONE_VIOLATION";
    case ErrorCode::MetricNotSpd: return "METRIC_NOT_SPD";
    case ErrorCode::NonpositiveEpsilon: return "NONPOSITIVE_EPSILON";
    case ErrorCode::GrowthConditionUnmet: return "GROWTH_CONDITION_UNMET";
    case ErrorCode::InvalidFrame: return "INVALID_FRAME";
    case ErrorCode::Step1Failure: return "STEP1_FAILURE";
    case ErrorCode::StencilOutOfDomain: return "STENCIL_OUT_OF_DOMAIN";
    case ErrorCode::UnsupportedDomain: return "UNSUPPORTED_DOMAIN";
    case ErrorCode::LinearSolveFailure: return "LINEAR_SOLVE_FAILURE";
    case ErrorCode::NonellipticNode: return "NONELLIPTIC_NODE";
    case ErrorCode::StepCollapse: return "STEP_COLLAPSE";
    case ErrorCode::MaxIterations: return "MAX_ITERATIONS";
    case ErrorCode::ScheduleTooAggressive: return "SCHEDULE_TOO_AGGRESSIVE";
    case ErrorCode::FrameDegenerate: return "FRAME_DEGENERATE";
    case ErrorCode::InsufficientLevels: return "INSUFFICIENT_LEVELS";
    case ErrorCode::CollarTooSmall: return "COLLAR_TOO_SMALL";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
      return 2;
    case ErrorCode::IoError:
      return 5;
    default:
      return 3;
  }
}

std::string ExtendedReal::to_string() const {
  if (is_positive_infinity()) return "+inf";
  if (is_negative_infinity()) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, res.ptr);
}

}  // namespace fnlab
