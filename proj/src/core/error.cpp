#include "adnet/error.hpp"

namespace adnet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::UnnormalizedKernel: return "UnnormalizedKernel";
    case ErrorCode::InconsistentAutonomousTable: return "InconsistentAutonomousTable";
    case ErrorCode::BadQuadrature: return "BadQuadrature";
    case ErrorCode::SameState: return "SameState";
    case ErrorCode::PositionOutOfDomain: return "PositionOutOfDomain";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::RateBoundViolated: return "RateBoundViolated";
    case ErrorCode::LawHorizonTooShort: return "LawHorizonTooShort";
    case ErrorCode::PathDomainMismatch: return "PathDomainMismatch";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotAutonomous: return "NotAutonomous";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BinningMismatch: return "BinningMismatch";
  }
  return "Unknown";
}

}  // namespace adnet
