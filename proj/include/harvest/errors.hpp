// Exception hierarchy shared by every harvest module.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace harvest {

/// A value violates a type invariant (negative mass, zero load, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inputs are individually valid but an operation's numerical precondition
/// does not hold (zero damping at resonance, unbracketed bandwidth, ...).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class BandwidthNotBracketed : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// A transient run ended before the response reached steady state.
class NotSettledError : public std::runtime_error {
public:
    NotSettledError(const std::string &what, double drift)
        : std::runtime_error(what), drift_(drift) {}

    /// Relative amplitude change between the last two forcing periods.
    double drift() const noexcept { return drift_; }

private:
    double drift_;
};

/// Malformed or unresolvable configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string &message) {
    if (!condition)
        throw InvalidParameter(message);
}

inline void require_precondition(bool condition, const std::string &message) {
    if (!condition)
        throw PreconditionError(message);
}

} // namespace detail

} // namespace harvest
