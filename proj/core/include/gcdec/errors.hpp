#pragma once

#include <stdexcept>
#include <string>

namespace gcdec {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix does not have the rank an operation requires.
struct RankDeficient : Error {
    using Error::Error;
};

// Operand shapes do not line up.
struct DimensionMismatch : Error {
    using Error::Error;
};

// Malformed text input (matrix files, reliability files, tree files).
// Carries the 1-based line number when known.
struct ParseError : Error {
    explicit ParseError(const std::string& what, long line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_number(line) {}
    long line_number;
};

// A parameter is outside its documented domain.
struct InvalidParam : Error {
    using Error::Error;
};

// Random construction failed after the retry budget (e.g. rank-deficient draws).
struct GenerationFailed : Error {
    using Error::Error;
};

// A loaded G/H pair fails g * h^T = 0 or a rank check.
struct InconsistentCode : Error {
    using Error::Error;
};

// A dimension exceeds the guard an exhaustive routine enforces.
struct TooLarge : Error {
    using Error::Error;
};

// Requested list size exceeds the searchable space.
struct ListTooLarge : Error {
    using Error::Error;
};

// A search ran out of patterns before satisfying its goal.
struct Exhausted : Error {
    using Error::Error;
};

// Requested code dimension does not fit the block length.
struct CapacityExceeded : Error {
    using Error::Error;
};

// Invalid experiment configuration (maps to CLI exit code 1).
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem trouble while writing results.
struct IoError : Error {
    using Error::Error;
};

}  // namespace gcdec
