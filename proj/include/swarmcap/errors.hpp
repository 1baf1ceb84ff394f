#pragma once

#include <stdexcept>
#include <string>

namespace swarmcap {

// Requested state space exceeds the configured cap.
struct EnumerationLimitExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A (signature, block) transition was requested for a block the peer already holds.
struct InvalidTransition : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iterative solver exhausted its budget without meeting the residual target.
struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The restricted chain has more than one closed communicating class.
struct ReducibleChain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Birth-death occupancy diverges before the truncation cap.
struct Unstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rate parameter required to be positive is zero (e.g. endgame rate).
struct DegenerateRates : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two experiment sweeps cannot be joined row-by-row.
struct AxisMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An experiment spec failed validation; `field` names the offending entry.
struct SpecError : std::invalid_argument {
    std::string field;
    SpecError(std::string field_, const std::string& what_)
        : std::invalid_argument(field_ + ": " + what_), field(std::move(field_)) {}
};

} // namespace swarmcap
