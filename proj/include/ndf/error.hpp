#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ndf {

enum class ErrorCode {
  EmptySpace,
  BadWeight,
  SpaceMismatch,
  NotIncreasing,
  NotAlternating,
  InconsistentSamples,
  BadSpec,
  NoConvergence,
  PreconditionFailed,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every recoverable library failure. The code
/// identifies the violated contract; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ndf
