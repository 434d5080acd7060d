#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adnet {

enum class ErrorCode {
  ParseError,
  UnknownKey,
  InvalidArgument,
  IoError,
  // model
  NegativeRate,
  UnnormalizedKernel,
  InconsistentAutonomousTable,
  BadQuadrature,
  SameState,
  PositionOutOfDomain,
  // sim
  IndexOutOfRange,
  RateBoundViolated,
  LawHorizonTooShort,
  // edge-field
  PathDomainMismatch,
  EmptyMeasure,
  // limit-solver
  NoConvergence,
  // autonomous-pde
  NotAutonomous,
  StepTooLarge,
  // metrics
  HorizonMismatch,
  SizeLimitExceeded,
  LengthMismatch,
  BinningMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

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

}  // namespace adnet
