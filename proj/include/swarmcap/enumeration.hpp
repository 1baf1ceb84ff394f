#pragma once

#include <cstdint>
#include <vector>

#include "swarmcap/params.hpp"
#include "swarmcap/state.hpp"

namespace swarmcap {

struct EnumerationOptions {
    std::uint64_t max_states = 5'000'000;
};

// Number of occupancy vectors: weak compositions of N peers over 2^K - 1
// signature slots, plus the seed slot when lingering is enabled. Throws
// EnumerationLimitExceeded when the count exceeds `max_states` (or does not
// fit in 64 bits).
std::uint64_t state_space_size(const ModelParams& params,
                               const EnumerationOptions& options = {});

// Every occupancy vector, in lexicographic order of (counts[0], counts[1],
// ..., seeds). Deterministic, independent of any parallel evaluation.
std::vector<SwarmState> enumerate_states(const ModelParams& params,
                                         const EnumerationOptions& options = {});

// Distinct canonical representatives {lump_state(s)} over enumerate_states,
// in the same deterministic order.
std::vector<SwarmState> enumerate_lumped_states(const ModelParams& params,
                                                const EnumerationOptions& options = {});

} // namespace swarmcap
