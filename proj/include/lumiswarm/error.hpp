#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lumiswarm {

enum class ErrorCode {
  DuplicatePoints,
  NotOnBoundary,
  DegenerateBasis,
  EmptyIntersection,
  RobotTerminated,
  CollisionPresent,
  MissingAxisKnowledge,
  MissingDeltaKnowledge,
  MissingNKnowledge,
  PreconditionNotMet,
  EmptyActivationRejected,
  FairnessViolation,
  LengthMismatch,
  NotAllTerminated,
  ConfigInvalid,
  StaleDecision,
  IllegalDecision,
  TraceInvalid,
};

std::string_view toString(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (CLI exit codes, playground error messages) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lumiswarm
