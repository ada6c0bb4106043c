#include "satflow/error.hpp"

namespace satflow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::non_positive_interior: return "NonPositiveInterior";
    case ErrorCode::integral_diverged: return "IntegralDiverged";
    case ErrorCode::anchor_invalid: return "AnchorInvalid";
    case ErrorCode::unknown_family: return "UnknownFamily";
    case ErrorCode::bad_parameter: return "BadParameter";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::energy_infinite: return "EnergyInfinite";
    case ErrorCode::singular_evaluation: return "SingularEvaluation";
    case ErrorCode::newton_diverged: return "NewtonDiverged";
    case ErrorCode::bound_violation: return "BoundViolation";
    case ErrorCode::step_failed: return "StepFailed";
    case ErrorCode::mass_out_of_range: return "MassOutOfRange";
    case ErrorCode::bracket_failed: return "BracketFailed";
    case ErrorCode::non_unique_plateau: return "NonUniquePlateau";
    case ErrorCode::support_overflow: return "SupportOverflow";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::refinement_mismatch: return "RefinementMismatch";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace satflow
