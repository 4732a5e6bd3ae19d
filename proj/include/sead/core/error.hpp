#pragma once

#include <stdexcept>
#include <string>

namespace sead {

// Numeric values are part of the C API (sead_status) and the CLI error prefix.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Io = 2,
    Format = 3,
    Precondition = 4,
    Numeric = 5,
    NotFound = 6,
    Exists = 7,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace sead
