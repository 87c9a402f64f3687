#include "rmplan/error.hpp"

namespace rmplan {

const char* to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::LimitViolation: return "LimitViolation";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DerivativeInconsistency: return "DerivativeInconsistency";
    case ErrorCode::DegenerateScene: return "DegenerateScene";
    case ErrorCode::NoHit: return "NoHit";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::IKFailure: return "IKFailure";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::AtBoundary: return "AtBoundary";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::CalibrationFailed: return "CalibrationFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace rmplan
