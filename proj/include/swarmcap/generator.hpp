#pragma once

#include <cstdint>
#include <vector>

#include "swarmcap/enumeration.hpp"
#include "swarmcap/params.hpp"
#include "swarmcap/rates.hpp"
#include "swarmcap/state.hpp"

namespace swarmcap {

// Sparse infinitesimal generator. Only off-diagonal entries are stored; the
// implied diagonal is -exit_rate[row], so every row sums to zero.
struct GeneratorMatrix {
    struct Entry {
        std::uint32_t row = 0;
        std::uint32_t col = 0;
        double rate = 0.0;
    };

    std::size_t dimension = 0;
    std::vector<Entry> entries;      // sorted by (row, col), duplicates merged
    std::vector<double> exit_rate;   // off-diagonal row sums

    // max |row sum| including the implied diagonal; 0 for an exact generator.
    double max_row_sum_error() const;
};

// Generator plus the state bookkeeping needed to interpret it.
struct GeneratorBuild {
    std::vector<SwarmState> states;
    GeneratorMatrix matrix;
    // Completion (departure) rate per state. Includes completion self-loops,
    // which never appear in `matrix`; with lingering, this is gamma * seeds.
    std::vector<double> departure_rate;
    bool lumped = false;

    // Index of `state` (canonicalized first when lumped); npos if absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of(const SwarmState& state) const;
};

// Assembles the generator over the full enumerated (optionally lumped) state
// space. Lumped successors are canonicalized and parallel rates merged.
GeneratorBuild build_generator(const ModelParams& params, bool lumped,
                               const EnumerationOptions& options = {});

// Sub-chain on the states reachable from `start` (typically the all-empty
// state); the stationary solve is only meaningful on this restriction.
GeneratorBuild restrict_to_reachable(const GeneratorBuild& build, std::size_t start);

} // namespace swarmcap
