#include "edmlift/core/error.hpp"

namespace edmlift {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegeneratePose: return "degenerate-pose";
    case ErrorCode::kTooFewObservations: return "too-few-observations";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kNumericFailure: return "numeric-failure";
    case ErrorCode::kDegenerateMatrix: return "degenerate-matrix";
    case ErrorCode::kIncompleteMatrix: return "incomplete-matrix";
    case ErrorCode::kDegenerateAlignment: return "degenerate-alignment";
    case ErrorCode::kCorrelationUndefined: return "correlation-undefined";
    case ErrorCode::kBehindCamera: return "behind-camera";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace edmlift
