#include "sead/core/error.hpp"

namespace sead {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Exists: return "exists";
    }
    return "unknown";
}

} // namespace sead
