#include "lumiswarm/error.hpp"

namespace lumiswarm {

std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicatePoints: return "DuplicatePoints";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::RobotTerminated: return "RobotTerminated";
    case ErrorCode::CollisionPresent: return "CollisionPresent";
    case ErrorCode::MissingAxisKnowledge: return "MissingAxisKnowledge";
    case ErrorCode::MissingDeltaKnowledge: return "MissingDeltaKnowledge";
    case ErrorCode::MissingNKnowledge: return "MissingNKnowledge";
    case ErrorCode::PreconditionNotMet: return "PreconditionNotMet";
    case ErrorCode::EmptyActivationRejected: return "EmptyActivationRejected";
    case ErrorCode::FairnessViolation: return "FairnessViolation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotAllTerminated: return "NotAllTerminated";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StaleDecision: return "StaleDecision";
    case ErrorCode::IllegalDecision: return "IllegalDecision";
    case ErrorCode::TraceInvalid: return "TraceInvalid";
  }
  return "Unknown";
}

}  // namespace lumiswarm
