#include "stranglerkit/errors.hpp"

namespace stranglerkit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::AlreadyExtracted: return "AlreadyExtracted";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::UnknownStep: return "UnknownStep";
    case ErrorCode::NotLastApplied: return "NotLastApplied";
    case ErrorCode::NothingToRollback: return "NothingToRollback";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::AlreadyMirrored: return "AlreadyMirrored";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NoRouteMatched: return "NoRouteMatched";
    case ErrorCode::UnknownRoute: return "UnknownRoute";
    case ErrorCode::InvalidPercent: return "InvalidPercent";
    case ErrorCode::DuplicateInstance: return "DuplicateInstance";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::UnknownService: return "UnknownService";
    case ErrorCode::NoHealthyInstance: return "NoHealthyInstance";
    case ErrorCode::UpstreamFailure: return "UpstreamFailure";
    case ErrorCode::UnboundEndpoint: return "UnboundEndpoint";
    case ErrorCode::IsolationBreach: return "IsolationBreach";
    case ErrorCode::TraceMismatch: return "TraceMismatch";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace stranglerkit
