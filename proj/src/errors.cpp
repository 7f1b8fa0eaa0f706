#include "gibbsdim/errors.hpp"

namespace gibbsdim {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedTailQuery: return "UnsupportedTailQuery";
    case ErrorCode::ExactDigitRequired: return "ExactDigitRequired";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::EstimationFailed: return "EstimationFailed";
    case ErrorCode::NoK0Found: return "NoK0Found";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace gibbsdim
