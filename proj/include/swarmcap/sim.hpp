#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "swarmcap/params.hpp"
#include "swarmcap/state.hpp"

namespace swarmcap {

enum class InitialCondition {
    AllEmpty,  // every peer starts with no blocks
    OneClub,   // every peer holds all blocks but block 1, except one empty peer
    Custom,
};

struct SimConfig {
    ModelParams params;
    std::uint64_t seed = 1;      // base seed; replication r uses stream (seed, r)
    double horizon = 1000.0;     // simulated time per replication
    double warmup = 0.0;         // excluded from steady-state statistics
    int replications = 1;
    InitialCondition initial = InitialCondition::AllEmpty;
    std::optional<SwarmState> custom_initial;

    void validate() const;  // throws std::invalid_argument
};

// One logged event of a trajectory; byte-stable for determinism regression.
struct EventRecord {
    double time = 0.0;
    std::uint32_t from_mask = 0;  // recipient signature (or 0 for seed departures)
    std::uint8_t block = 0;       // received block; 0 for seed departures
    std::uint8_t kind = 0;        // 0 transfer, 1 completion, 2 seed departure
};

// Statistically exact trajectory of one replication: exponential holding
// times, categorical event choice over the per-state transition rates shared
// with the exact chain. Identical (seed, replication) yields an identical log.
struct Trajectory {
    std::vector<EventRecord> events;
    SwarmState final_state;
    std::uint64_t departures = 0;          // total completions over the horizon
    std::uint64_t departures_after_warmup = 0;
};
Trajectory simulate(const SimConfig& config, int replication = 0, bool keep_events = true);

struct ThroughputEstimate {
    double mean = 0.0;          // departures per unit time after warmup
    double ci_halfwidth = 0.0;  // Student-t 95% half-width across replications
    int replications = 0;
};

// Steady-state throughput across replications (parallelized; aggregation is
// replication-order independent, so results are deterministic).
ThroughputEstimate estimate_throughput(const SimConfig& config);

struct TransientSample {
    double time = 0.0;
    bool censored = false;  // horizon reached before the stopping condition
};

// Empirical stopping-time distribution. `cdf` is the sub-distribution on
// `grid` (censored samples never count as stopped).
struct TransientResult {
    std::vector<TransientSample> samples;
    std::vector<double> grid;
    std::vector<double> cdf;
    std::size_t censored = 0;

    double probability_by(double t) const;
};

// Time until at least fraction*N peers hold exactly K-1 blocks, all missing
// the current rarest block (ties resolved to the lowest block index).
// Requires the AllEmpty initial condition.
TransientResult time_to_one_club(const SimConfig& config, double fraction,
                                 const std::vector<double>& grid = {});

// Time until fewer than fraction*N peers remain in the one-club, starting
// from the OneClub initial condition.
TransientResult time_to_leave_one_club(const SimConfig& config, double fraction,
                                       const std::vector<double>& grid = {});

} // namespace swarmcap
