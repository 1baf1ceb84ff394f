#include "swarmcap/markov.hpp"

#include <algorithm>
#include <stdexcept>

#include "swarmcap/errors.hpp"

namespace swarmcap {

double throughput(const StationaryDistribution& pi, const GeneratorBuild& build) {
    if (pi.probabilities.size() != build.departure_rate.size())
        throw std::invalid_argument("throughput: distribution does not match the generator");
    double rate = 0.0;
    for (std::size_t i = 0; i < pi.probabilities.size(); ++i)
        rate += pi.probabilities[i] * build.departure_rate[i];
    return rate;
}

namespace {

// Aggregation hint for the iterative solver: group states by the metastable
// coordinate pair (one-club occupancy, newcomer count). The aggregate chain
// then resolves the slow drift in and out of the one-club directly.
std::vector<std::uint32_t> metastable_partition(const GeneratorBuild& build, int blocks,
                                                int peers) {
    std::vector<std::uint32_t> partition;
    partition.reserve(build.states.size());
    for (const SwarmState& state : build.states) {
        const ReplicaProfile profile = replica_profile(state);
        int rarest = 1;
        for (int j = 2; j <= blocks; ++j)
            if (profile.of(j) < profile.of(rarest)) rarest = j;
        const std::uint32_t club = state.counts[Signature::all_but(blocks, rarest).mask];
        partition.push_back(club * static_cast<std::uint32_t>(peers + 1) + state.counts[0]);
    }
    return partition;
}

} // namespace

ThroughputSolution solve_throughput(const ModelParams& params, bool lumped,
                                    const SolveOptions& solve_options,
                                    const EnumerationOptions& enum_options) {
    params.validate();
    const GeneratorBuild full = build_generator(params, lumped, enum_options);

    SwarmState start = SwarmState::all_empty(params.blocks, static_cast<std::uint32_t>(params.peers));
    if (lumped) start = lump_state(start);  // already canonical, kept for clarity
    const std::size_t start_index = full.index_of(start);
    if (start_index == GeneratorBuild::npos)
        throw std::logic_error("solve_throughput: all-empty state missing from enumeration");

    const GeneratorBuild reachable = restrict_to_reachable(full, start_index);
    SolveOptions tuned = solve_options;
    if (tuned.partition.empty() && reachable.states.size() > tuned.gth_max_states)
        tuned.partition = metastable_partition(reachable, params.blocks, params.peers);
    const StationaryDistribution pi = solve_stationary(reachable.matrix, tuned);

    ThroughputSolution solution;
    solution.throughput = throughput(pi, reachable);
    solution.enumerated_states = full.states.size();
    solution.solved_states = reachable.states.size();
    solution.residual = pi.residual;
    solution.iterations = pi.iterations;
    solution.lumped = lumped;
    return solution;
}

PopulationSweep sweep_population(ModelParams params, int peers_from, int peers_to,
                                 int peers_step, bool lumped,
                                 const SolveOptions& solve_options,
                                 const EnumerationOptions& enum_options) {
    if (peers_step <= 0) throw std::invalid_argument("sweep_population: step must be positive");
    if (peers_from < 1 || peers_to < peers_from)
        throw std::invalid_argument("sweep_population: empty population range");

    PopulationSweep sweep;
    for (int n = peers_from; n <= peers_to; n += peers_step) {
        params.peers = n;
        const ThroughputSolution solution =
            solve_throughput(params, lumped, solve_options, enum_options);
        sweep.points.push_back({n, solution.throughput});
    }
    sweep.peak = 0.0;
    for (const PopulationPoint& p : sweep.points) sweep.peak = std::max(sweep.peak, p.throughput);
    sweep.plateau = sweep.points.back().throughput;
    return sweep;
}

} // namespace swarmcap
