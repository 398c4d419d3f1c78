#ifndef NLD_ERRORS_HPP
#define NLD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nld {

// Base class for all library errors so callers can catch everything at once.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument sits on (or within 1e-14 of) a pole of the requested function.
struct PoleError : Error {
    explicit PoleError(const std::string& msg) : Error(msg) {}
};

// Two shifts coincide where the formula requires them pairwise distinct.
struct CoincidentShiftsError : Error {
    explicit CoincidentShiftsError(const std::string& msg) : Error(msg) {}
};

// Combinatorial guard tripped (|A| > 12).
struct TooLargeError : Error {
    explicit TooLargeError(const std::string& msg) : Error(msg) {}
};

struct DimensionTooSmallError : Error {
    explicit DimensionTooSmallError(const std::string& msg) : Error(msg) {}
};

struct NumericalBreakdownError : Error {
    explicit NumericalBreakdownError(const std::string& msg) : Error(msg) {}
};

struct QuadratureNonConvergenceError : Error {
    explicit QuadratureNonConvergenceError(const std::string& msg) : Error(msg) {}
};

struct NonConvergenceError : Error {
    explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

struct SupportViolationError : Error {
    explicit SupportViolationError(const std::string& msg) : Error(msg) {}
};

struct TruncationTooCoarseError : Error {
    explicit TruncationTooCoarseError(const std::string& msg) : Error(msg) {}
};

struct UnknownReductionTypeError : Error {
    explicit UnknownReductionTypeError(const std::string& msg) : Error(msg) {}
};

// Domain / precondition violations (bad flags, bad ranges, bad input values).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Zero-file ingestion problems carry the offending line number or key.
struct MalformedLineError : Error {
    int lineno;
    MalformedLineError(int line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), lineno(line) {}
};

struct NonAscendingOrdinateError : Error {
    int lineno;
    NonAscendingOrdinateError(int line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), lineno(line) {}
};

struct DuplicateDiscriminantError : Error {
    long long d;
    explicit DuplicateDiscriminantError(long long dd)
        : Error("duplicate discriminant block d=" + std::to_string(dd)), d(dd) {}
};

struct EmptySelectionError : Error {
    explicit EmptySelectionError(const std::string& msg) : Error(msg) {}
};

}  // namespace nld

#endif
