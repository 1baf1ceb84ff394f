#include "swarmcap/state.hpp"

#include <algorithm>
#include <numeric>

#include "swarmcap/signature.hpp"

namespace swarmcap {

std::string to_string(Signature sig, int blocks) {
    std::string out = "{";
    bool first = true;
    for (int j = 1; j <= blocks; ++j) {
        if (!sig.contains(j)) continue;
        if (!first) out += ',';
        out += std::to_string(j);
        first = false;
    }
    out += '}';
    return out;
}

std::uint64_t SwarmState::population() const {
    std::uint64_t total = seeds;
    for (std::uint32_t c : counts) total += c;
    return total;
}

std::size_t SwarmStateHash::operator()(const SwarmState& s) const {
    // FNV-1a over the occupancy vector and the seed slot.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint32_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    for (std::uint32_t c : s.counts) mix(c);
    mix(s.seeds);
    return static_cast<std::size_t>(h);
}

ReplicaProfile replica_profile(const SwarmState& state) {
    const int blocks = state.blocks();
    ReplicaProfile profile;
    profile.replicas.assign(static_cast<std::size_t>(blocks), 0);
    for (std::uint32_t mask = 1; mask < state.counts.size(); ++mask) {
        const std::uint32_t n = state.counts[mask];
        if (n == 0) continue;
        std::uint32_t bits = mask;
        while (bits) {
            const int bit = std::countr_zero(bits);
            profile.replicas[static_cast<std::size_t>(bit)] += n;
            bits &= bits - 1;
        }
    }
    return profile;
}

SwarmState lump_state(const SwarmState& state) {
    const int blocks = state.blocks();
    const ReplicaProfile profile = replica_profile(state);

    // Blocks ordered by ascending replica count, ties by ascending index.
    std::vector<int> order(static_cast<std::size_t>(blocks));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&profile](int a, int b) {
        return profile.replicas[static_cast<std::size_t>(a)] <
               profile.replicas[static_cast<std::size_t>(b)];
    });

    // relabel[old bit] = new bit
    std::vector<int> relabel(static_cast<std::size_t>(blocks));
    for (int pos = 0; pos < blocks; ++pos)
        relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;

    SwarmState lumped(blocks);
    lumped.seeds = state.seeds;
    for (std::uint32_t mask = 0; mask < state.counts.size(); ++mask) {
        const std::uint32_t n = state.counts[mask];
        if (n == 0) continue;
        std::uint32_t remapped = 0;
        std::uint32_t bits = mask;
        while (bits) {
            const int bit = std::countr_zero(bits);
            remapped |= std::uint32_t{1} << relabel[static_cast<std::size_t>(bit)];
            bits &= bits - 1;
        }
        lumped.counts[remapped] += n;
    }
    return lumped;
}

std::string to_string(const SwarmState& state) {
    const int blocks = state.blocks();
    std::string out;
    for (std::uint32_t mask = 0; mask < state.counts.size(); ++mask) {
        if (state.counts[mask] == 0) continue;
        if (!out.empty()) out += ' ';
        out += to_string(Signature{mask}, blocks);
        out += ':';
        out += std::to_string(state.counts[mask]);
    }
    if (state.seeds > 0) {
        if (!out.empty()) out += ' ';
        out += "seeds:" + std::to_string(state.seeds);
    }
    if (out.empty()) out = "(empty)";
    return out;
}

} // namespace swarmcap
