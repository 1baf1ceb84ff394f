#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "swarmcap/params.hpp"

namespace swarmcap {

// Stationary summary of one birth-death queue with constant arrivals and
// death rate n * base_service + bonus_service in state n >= 1.
struct QueueSolution {
    double pi0 = 1.0;           // P(queue empty)
    double mean_n = 0.0;        // E[occupancy]
    double arrival = 0.0;
    double base_service = 0.0;  // per-peer service coefficient
    double bonus_service = 0.0; // state-independent extra service (publisher share)
    std::size_t levels = 1;     // truncation level actually used

    // Birth-death throughput identity, exact at stationarity:
    // bonus*(1 - pi0) + mean_n*base = arrival.
    double flow_error() const {
        return bonus_service * (1.0 - pi0) + mean_n * base_service - arrival;
    }
};

struct BirthDeathOptions {
    double tail_mass = 1e-12;        // adaptive truncation target (relative)
    std::size_t max_levels = 1'000'000;
};

// Solves the truncated birth-death chain, doubling the truncation level until
// the tail mass is negligible. Throws Unstable when occupancy diverges
// (possible only when base_service is 0 and arrivals meet or exceed the bonus).
QueueSolution solve_birth_death(double arrival, double base_service, double bonus_service,
                                const BirthDeathOptions& options = {});

// Rates at which peers leave the newcomer-side queues F_0..F_J: gamma_r[j] is
// the publisher-served flow (peer acquires the rare block and switches
// branches), gamma_p[j] the peer-served flow into F_{j+1}.
std::pair<std::vector<double>, std::vector<double>>
flow_rates(const std::vector<QueueSolution>& queues, const ModelParams& params);

// Rate at which the peers holding the rare block serve it onward to the
// one-club. Requires blocks >= 2 and a positive endgame rate.
double gifted_service_rate(const std::vector<double>& gamma_r, const ModelParams& params);

// Same quantity via the expected occupancy of the rare-block-side queues;
// algebraically identical, used as a consistency check.
double gifted_service_rate_occupancy_form(const std::vector<double>& gamma_r,
                                          const ModelParams& params);

// Total system departure rate: branch flows, one-club service by rare-block
// holders, and the publisher serving the one-club directly when every
// newcomer queue is empty.
double total_departure(const std::vector<double>& gamma_r, double gifted_rate,
                       const std::vector<double>& pi0s, const ModelParams& params);

struct QueueNetworkSolution {
    int truncation = 1;                 // J
    std::vector<QueueSolution> queues;  // F_0..F_J
    std::vector<double> gamma_r;
    std::vector<double> gamma_p;
    double gifted_rate = 0.0;           // service of the rare block to the one-club
    double departure_rate = 0.0;        // network departure rate at the fixed point
    double lambda_s = 0.0;              // converged limiting throughput
    std::size_t iterations = 0;
    bool converged = false;
};

struct FixedPointOptions {
    int truncation = -1;          // J; -1 picks min(1, blocks - 2)
    double tolerance = 1e-8;      // relative change stopping rule
    std::size_t max_iterations = 100'000;
    double damping = 0.5;
    BirthDeathOptions queue_options{};
};

// Saturated-swarm fixed point: start the offered rate at the publisher
// capacity and iterate the queue chain until the departure rate reproduces
// it. Requires blocks >= 2 and endgame_rate > 0.
QueueNetworkSolution fixed_point(const ModelParams& params, const FixedPointOptions& options = {});

// Closed-form ceiling on the limiting throughput when newcomers are served
// by the publisher whenever it is free: ((K-2) mu/mu' + 2) U.
double throughput_bound(const ModelParams& params);

} // namespace swarmcap
