#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pstore {

enum class ErrorCode {
  kNotFound,
  kWrongKind,
  kStrategyMismatch,
  kIntegrityError,
  kImmutableViolation,
  kEncodingError,
  kDecodeError,
  kResolutionError,
  kUnresolvable,
  kDataLoss,
  kSchemaError,
  kCommitAborted,
  kDeliveryFailure,
  kEmptyRing,
  kDuplicate,
  kLastNode,
  kNodeCrashed,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures surface as pstore::Error carrying a code; callers
// branch on code(), never on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pstore
