#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace confine {

enum class ErrorCode {
  InvalidArgument,
  NumericOverflow,
  ZeroMass,
  Diverged,
  CoincidentPoints,
  FocalAtOrigin,
  NotCentered,
  PreconditionRadius,
  RejectionExhausted,
  Degenerate,
  NotIntegrable,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying one of the error kinds above. Callers that need to
/// distinguish numeric failures from usage errors switch on code().
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace confine
