#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dramnet {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid graph construction: duplicate nodes, illegal arc endpoints,
/// mutation of a frozen net.
struct ConstructionError : Error {
    using Error::Error;
};

/// API misuse that is independent of net contents (e.g. asking for the
/// enabledness of a place id).
struct UsageError : Error {
    using Error::Error;
};

/// Firing a transition that is not enabled.
struct FiringError : Error {
    using Error::Error;
};

/// Malformed protocol configuration or unresolved timing names.
struct ConfigError : Error {
    using Error::Error;
};

/// Timed-session misuse, e.g. recording a firing before an earlier one.
struct TimingError : Error {
    using Error::Error;
};

/// Malformed trace text. `line` is 1-based.
struct TraceParseError : Error {
    TraceParseError(std::size_t line_no, const std::string& what_arg)
        : Error("line " + std::to_string(line_no) + ": " + what_arg), line(line_no) {}

    std::size_t line;
};

/// An exploration hit its configured safety limit. `partial_count` is the
/// number of states or traces produced before the limit fired.
struct BoundedExplorationError : Error {
    BoundedExplorationError(std::uint64_t count, const std::string& what_arg)
        : Error(what_arg), partial_count(count) {}

    std::uint64_t partial_count;
};

} // namespace dramnet
