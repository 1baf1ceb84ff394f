#pragma once

#include <cstddef>
#include <vector>

#include "swarmcap/generator.hpp"
#include "swarmcap/stationary.hpp"

namespace swarmcap {

// Expected completion rate under `pi`: sum over states of pi * departure
// rate. Completion self-loops and seed departures are included.
double throughput(const StationaryDistribution& pi, const GeneratorBuild& build);

struct ThroughputSolution {
    double throughput = 0.0;
    std::size_t enumerated_states = 0;  // full (or lumped) enumeration size
    std::size_t solved_states = 0;      // after reachability restriction
    double residual = 0.0;
    std::size_t iterations = 0;
    bool lumped = false;
};

// Full pipeline: enumerate, assemble, restrict to the states reachable from
// all-empty, solve, and weigh departures. Lumped and unlumped solves agree
// on throughput; lumped is the cheaper default.
ThroughputSolution solve_throughput(const ModelParams& params, bool lumped = true,
                                    const SolveOptions& solve_options = {},
                                    const EnumerationOptions& enum_options = {});

struct PopulationPoint {
    int peers = 0;
    double throughput = 0.0;
};

struct PopulationSweep {
    std::vector<PopulationPoint> points;
    double peak = 0.0;       // max throughput over the curve (lambda_c)
    double plateau = 0.0;    // throughput at the largest population computed (lambda_s estimate)
};

// Exact throughput across populations. Each point must stay under the
// enumeration cap; larger populations belong to the simulator.
PopulationSweep sweep_population(ModelParams params, int peers_from, int peers_to,
                                 int peers_step = 1, bool lumped = true,
                                 const SolveOptions& solve_options = {},
                                 const EnumerationOptions& enum_options = {});

} // namespace swarmcap
