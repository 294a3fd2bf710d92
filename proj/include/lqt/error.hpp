#pragma once

#include <stdexcept>
#include <string>

namespace lqt {

enum class ErrorCode {
  DimensionMismatch,
  NotPSD,
  NonpositiveHorizon,
  RegularConditionViolated,
  StepInvalid,
  NoConvergence,
  UpsilonSingular,
  SingularAbar,
  NotScalarOutput,
  GridMismatch,
  NonFiniteState,
  SingularStageHessian,
  ScenarioInvalid,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NonpositiveHorizon: return "NonpositiveHorizon";
    case ErrorCode::RegularConditionViolated: return "RegularConditionViolated";
    case ErrorCode::StepInvalid: return "StepInvalid";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UpsilonSingular: return "UpsilonSingular";
    case ErrorCode::SingularAbar: return "SingularAbar";
    case ErrorCode::NotScalarOutput: return "NotScalarOutput";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SingularStageHessian: return "SingularStageHessian";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lqt
