#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swarmcap/params.hpp"
#include "swarmcap/signature.hpp"

namespace swarmcap {

// Occupancy vector of a closed swarm: counts[m] is the number of peers whose
// signature mask equals m, for every m in [0, 2^K - 1). Peers that hold all
// K blocks are never stored here; with lingering enabled they occupy the
// separate `seeds` slot until they depart.
struct SwarmState {
    std::vector<std::uint32_t> counts;  // size 2^K - 1, indexed by signature mask
    std::uint32_t seeds = 0;

    SwarmState() = default;
    explicit SwarmState(int blocks)
        : counts(static_cast<std::size_t>((std::uint64_t{1} << blocks) - 1), 0) {}

    static SwarmState all_empty(int blocks, std::uint32_t population) {
        SwarmState s(blocks);
        s.counts[0] = population;
        return s;
    }

    int blocks() const { return std::bit_width(counts.size()); }
    std::uint32_t count(Signature sig) const { return counts[sig.mask]; }
    std::uint32_t& count(Signature sig) { return counts[sig.mask]; }

    std::uint64_t population() const;

    bool operator==(const SwarmState&) const = default;
};

struct SwarmStateHash {
    std::size_t operator()(const SwarmState& s) const;
};

// Per-block replica counts over peers. The publisher's own copies are not
// counted, and neither are lingering seeds: both hold every block, so they
// shift all entries by the same constant and can never change which blocks
// are rarest.
struct ReplicaProfile {
    std::vector<std::uint32_t> replicas;  // replicas[j-1] = peers holding block j

    std::uint32_t of(int block) const { return replicas[block - 1]; }
};

ReplicaProfile replica_profile(const SwarmState& state);

// Canonical representative of `state` under block relabeling: blocks are
// renumbered by ascending replica count, ties broken by ascending original
// index. Idempotent; preserves the total population, the multiset of replica
// counts and the multiset of signature cardinalities.
SwarmState lump_state(const SwarmState& state);

std::string to_string(const SwarmState& state);

} // namespace swarmcap
