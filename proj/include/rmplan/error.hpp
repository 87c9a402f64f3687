#pragma once

#include <stdexcept>
#include <string>

namespace rmplan {

enum class ErrorCode {
  LimitViolation,
  NoSolution,
  NonConvergence,
  DerivativeInconsistency,
  DegenerateScene,
  NoHit,
  EmptySampleSet,
  IKFailure,
  SingularJacobian,
  ZeroGradient,
  EmptyMesh,
  AtBoundary,
  TooFewSamples,
  RejectionBudgetExceeded,
  DegenerateInput,
  Unreachable,
  DegenerateCurve,
  CalibrationFailed,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code; all library failures use it.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace rmplan
