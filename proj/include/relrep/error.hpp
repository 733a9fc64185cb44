#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relrep {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see relrep.h) and must not be reordered.
enum class ErrorCode : int {
    DimensionMismatch = 1,
    ZeroNormVector = 2,
    NonFinite = 3,
    DisconnectedGraph = 4,
    BadK = 5,
    BadIndex = 6,
    TooManyAnchors = 7,
    DuplicateKind = 8,
    BadLabel = 9,
    MissingCache = 10,
    BadShape = 11,
    WrongKind = 12,
    DegenerateInput = 13,
    MismatchedOperands = 14,
    ZeroEndToEnd = 15,
    SingularMatrix = 16,
    BadDim = 17,
    BadSize = 18,
    BadConfig = 19,
    ParseError = 20,
    RaggedRows = 21,
    IoError = 22,
    UnknownName = 23,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

} // namespace relrep
