#pragma once

#include <stdexcept>
#include <string>

namespace stranglerkit {

enum class ErrorCode {
  ParseError,
  ValidationError,
  UnknownContext,
  AlreadyExtracted,
  PreconditionFailed,
  UnknownStep,
  NotLastApplied,
  NothingToRollback,
  WrongMode,
  UnknownTable,
  AlreadyMirrored,
  NotConverged,
  NoRouteMatched,
  UnknownRoute,
  InvalidPercent,
  DuplicateInstance,
  UnknownInstance,
  UnknownService,
  NoHealthyInstance,
  UpstreamFailure,
  UnboundEndpoint,
  IsolationBreach,
  TraceMismatch,
  UsageError,
};

const char* error_code_name(ErrorCode code);

/// Toolkit-wide error type. Carries a machine-readable code plus a
/// human-readable detail string; what() is "<code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stranglerkit
