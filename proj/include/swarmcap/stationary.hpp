#pragma once

#include <cstddef>
#include <vector>

#include "swarmcap/generator.hpp"

namespace swarmcap {

struct StationaryDistribution {
    std::vector<double> probabilities;  // >= 0, sums to 1
    double residual = 0.0;              // achieved ||pi Q||_inf
    std::size_t iterations = 0;         // 0 for direct elimination
};

struct SolveOptions {
    // State-count ceiling for dense GTH elimination; larger chains go to the
    // aggregation solver. GTH is O(n^2) memory and O(n^3) time, so this is
    // kept well below the enumeration cap.
    std::size_t gth_max_states = 5000;
    double tolerance = 1e-10;            // residual target for iterative paths
    std::size_t max_iterations = 1'000'000;  // smoothing-sweep budget

    // Aggregation hint for the iterative path: group id per state, grouping
    // states that share the slow (metastable) coordinate. Plain smoothing
    // sweeps stall on nearly-decoupled chains; the aggregate solve removes
    // the slow mode. Empty = single group (pure smoothing).
    std::vector<std::uint32_t> partition;
};

// Stationary distribution of the chain described by Q. The chain must
// already be restricted to the states reachable from the initial state;
// states outside the single closed communicating class get probability zero.
// Throws ReducibleChain when more than one closed class exists, NotConverged
// when no solver path reaches the residual target.
StationaryDistribution solve_stationary(const GeneratorMatrix& matrix,
                                        const SolveOptions& options = {});

// Strongly connected components of the transition graph (Tarjan, iterative).
// Returns component ids in [0, count); `closed[id]` marks components with no
// edge leaving them.
struct ComponentSplit {
    std::vector<std::uint32_t> component;
    std::vector<bool> closed;
    std::size_t count = 0;
};
ComponentSplit strongly_connected_components(const GeneratorMatrix& matrix);

} // namespace swarmcap
