#include "pstore/error.hpp"

namespace pstore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kWrongKind: return "WRONG_KIND";
    case ErrorCode::kStrategyMismatch: return "STRATEGY_MISMATCH";
    case ErrorCode::kIntegrityError: return "INTEGRITY_ERROR";
    case ErrorCode::kImmutableViolation: return "IMMUTABLE_VIOLATION";
    case ErrorCode::kEncodingError: return "ENCODING_ERROR";
    case ErrorCode::kDecodeError: return "DECODE_ERROR";
    case ErrorCode::kResolutionError: return "RESOLUTION_ERROR";
    case ErrorCode::kUnresolvable: return "UNRESOLVABLE";
    case ErrorCode::kDataLoss: return "DATA_LOSS";
    case ErrorCode::kSchemaError: return "SCHEMA_ERROR";
    case ErrorCode::kCommitAborted: return "COMMIT_ABORTED";
    case ErrorCode::kDeliveryFailure: return "DELIVERY_FAILURE";
    case ErrorCode::kEmptyRing: return "EMPTY_RING";
    case ErrorCode::kDuplicate: return "DUPLICATE";
    case ErrorCode::kLastNode: return "LAST_NODE";
    case ErrorCode::kNodeCrashed: return "NODE_CRASHED";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

}  // namespace pstore
