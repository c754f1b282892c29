#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edmlift {

enum class ErrorCode {
  kInvalidInput,
  kInvalidArgument,
  kDegeneratePose,
  kTooFewObservations,
  kShape,
  kNumericFailure,
  kDegenerateMatrix,
  kIncompleteMatrix,
  kDegenerateAlignment,
  kCorrelationUndefined,
  kBehindCamera,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edmlift
