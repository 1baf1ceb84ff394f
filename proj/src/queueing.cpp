#include "swarmcap/queueing.hpp"

#include <cmath>
#include <stdexcept>

#include "swarmcap/errors.hpp"

namespace swarmcap {

QueueSolution solve_birth_death(double arrival, double base_service, double bonus_service,
                                const BirthDeathOptions& options) {
    if (arrival < 0) throw std::invalid_argument("solve_birth_death: negative arrival rate");
    if (base_service < 0 || bonus_service < 0)
        throw std::invalid_argument("solve_birth_death: negative service rate");
    if (base_service == 0 && bonus_service == 0 && arrival > 0)
        throw Unstable("solve_birth_death: arrivals with no service at all");

    QueueSolution q;
    q.arrival = arrival;
    q.base_service = base_service;
    q.bonus_service = bonus_service;
    if (arrival == 0) {
        q.pi0 = 1.0;
        q.mean_n = 0.0;
        q.levels = 1;
        return q;
    }
    if (base_service == 0 && arrival >= bonus_service)
        throw Unstable("solve_birth_death: arrival >= constant service, occupancy diverges");

    // Unnormalized terms t_n = prod_{m<=n} arrival / (m*base + bonus); sums
    // accumulate until the geometric tail bound drops below tail_mass.
    double term = 1.0;
    double total = 1.0;
    double weighted = 0.0;
    std::size_t n = 0;
    while (true) {
        ++n;
        const double death = static_cast<double>(n) * base_service + bonus_service;
        term *= arrival / death;
        total += term;
        weighted += term * static_cast<double>(n);
        const double ratio = arrival / (static_cast<double>(n + 1) * base_service + bonus_service);
        if (ratio < 1.0) {
            const double tail_bound = term * ratio / (1.0 - ratio);
            if (tail_bound <= options.tail_mass * total) break;
        }
        if (n >= options.max_levels)
            throw Unstable("solve_birth_death: truncation cap reached at " + std::to_string(n) +
                           " levels");
    }
    q.pi0 = 1.0 / total;
    q.mean_n = weighted / total;
    q.levels = n + 1;
    return q;
}

std::pair<std::vector<double>, std::vector<double>>
flow_rates(const std::vector<QueueSolution>& queues, const ModelParams& params) {
    std::vector<double> gamma_r(queues.size(), 0.0);
    std::vector<double> gamma_p(queues.size(), 0.0);
    double empty_prefix = 1.0;  // prod_{i<j} pi0(F_i); empty product = 1
    for (std::size_t j = 0; j < queues.size(); ++j) {
        gamma_r[j] = params.publisher_capacity * empty_prefix * (1.0 - queues[j].pi0);
        gamma_p[j] = queues[j].mean_n * params.endgame_rate;
        empty_prefix *= queues[j].pi0;
    }
    // Hidden newcomers receive nothing from peers, so no popular-block flow
    // leaves the newcomer queue.
    if (params.shield_newcomers && !gamma_p.empty()) gamma_p[0] = 0.0;
    return {std::move(gamma_r), std::move(gamma_p)};
}

double gifted_service_rate(const std::vector<double>& gamma_r, const ModelParams& params) {
    if (params.blocks < 2)
        throw std::invalid_argument("gifted_service_rate: needs at least two blocks");
    if (params.endgame_rate <= 0)
        throw DegenerateRates("gifted_service_rate: endgame rate must be positive");
    const double ratio = params.peer_rate / params.endgame_rate;
    double rate = 0.0;
    for (std::size_t l = 0; l < gamma_r.size(); ++l) {
        const double coefficient =
            static_cast<double>(params.blocks - 2) - static_cast<double>(l) + 1.0 / ratio;
        rate += ratio * coefficient * gamma_r[l];
    }
    return rate;
}

double gifted_service_rate_occupancy_form(const std::vector<double>& gamma_r,
                                          const ModelParams& params) {
    if (params.blocks < 2)
        throw std::invalid_argument("gifted_service_rate: needs at least two blocks");
    if (params.endgame_rate <= 0)
        throw DegenerateRates("gifted_service_rate: endgame rate must be positive");
    const int truncation = static_cast<int>(gamma_r.size()) - 1;  // J
    double total = 0.0;
    double flow_prefix = 0.0;
    // Infinite-server stages: E[n at stage i] = sum_{l<=i} gamma_r[l] / mu'.
    for (int i = 0; i < truncation; ++i) {
        flow_prefix += gamma_r[static_cast<std::size_t>(i)];
        total += params.peer_rate * flow_prefix / params.endgame_rate;
    }
    double flow_all = 0.0;
    for (double g : gamma_r) flow_all += g;
    total += (static_cast<double>(params.blocks - (truncation + 2)) * params.peer_rate +
              params.endgame_rate) /
             params.endgame_rate * flow_all;
    return total;
}

double total_departure(const std::vector<double>& gamma_r, double gifted_rate,
                       const std::vector<double>& pi0s, const ModelParams& params) {
    double branch_flow = 0.0;
    for (double g : gamma_r) branch_flow += g;
    double all_empty = 1.0;
    for (double p : pi0s) all_empty *= p;
    return branch_flow + gifted_rate + params.publisher_capacity * all_empty;
}

QueueNetworkSolution fixed_point(const ModelParams& params, const FixedPointOptions& options) {
    params.validate();
    if (params.blocks < 2)
        throw std::invalid_argument("fixed_point: needs at least two blocks");
    if (params.endgame_rate <= 0)
        throw DegenerateRates("fixed_point: endgame rate must be positive");

    const int max_truncation = params.blocks - 2;
    int truncation = options.truncation;
    if (truncation < 0) truncation = std::min(1, max_truncation);
    if (truncation > max_truncation)
        throw std::invalid_argument("fixed_point: truncation must be within 0.." +
                                    std::to_string(max_truncation));

    QueueNetworkSolution net;
    net.truncation = truncation;

    double lambda = params.publisher_capacity;  // the publisher underestimates the fixed point
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        net.queues.clear();
        double empty_prefix = 1.0;
        double arrival = lambda;
        for (int j = 0; j <= truncation; ++j) {
            if (params.shield_newcomers && j == 0) {
                // Hidden newcomers are served by the publisher alone, so the
                // newcomer queue is M/M/1(lambda, U); it saturates once the
                // network departure rate exceeds U and no popular-block flow
                // ever leaves it.
                QueueSolution q;
                q.arrival = arrival;
                q.base_service = 0.0;
                q.bonus_service = params.publisher_capacity;
                q.pi0 = arrival < params.publisher_capacity
                            ? 1.0 - arrival / params.publisher_capacity
                            : 0.0;
                q.mean_n = q.pi0 > 0.0 ? (1.0 - q.pi0) / q.pi0 : 0.0;
                net.queues.push_back(q);
                empty_prefix *= q.pi0;
                arrival = 0.0;  // no peer-served flow out of a shielded queue
                continue;
            }
            const QueueSolution q = solve_birth_death(
                arrival, params.endgame_rate, params.publisher_capacity * empty_prefix,
                options.queue_options);
            net.queues.push_back(q);
            empty_prefix *= q.pi0;
            arrival = q.mean_n * params.endgame_rate;  // peer-served flow feeds F_{j+1}
        }

        auto [gamma_r, gamma_p] = flow_rates(net.queues, params);
        net.gamma_r = std::move(gamma_r);
        net.gamma_p = std::move(gamma_p);
        net.gifted_rate = gifted_service_rate(net.gamma_r, params);

        std::vector<double> pi0s;
        pi0s.reserve(net.queues.size());
        for (const QueueSolution& q : net.queues) pi0s.push_back(q.pi0);
        net.departure_rate = total_departure(net.gamma_r, net.gifted_rate, pi0s, params);

        const double next =
            (1.0 - options.damping) * lambda + options.damping * net.departure_rate;
        const double change = std::abs(next - lambda);
        lambda = next;
        net.iterations = iter;
        if (change <= options.tolerance * std::max(lambda, 1e-300)) {
            net.converged = true;
            break;
        }
    }
    if (!net.converged)
        throw NotConverged("fixed_point: no convergence after " +
                           std::to_string(options.max_iterations) + " iterations");
    net.lambda_s = lambda;
    return net;
}

double throughput_bound(const ModelParams& params) {
    if (params.blocks < 2)
        throw std::invalid_argument("throughput_bound: needs at least two blocks");
    if (params.endgame_rate <= 0)
        throw DegenerateRates("throughput_bound: endgame rate must be positive");
    return (static_cast<double>(params.blocks - 2) * params.peer_rate / params.endgame_rate +
            2.0) *
           params.publisher_capacity;
}

} // namespace swarmcap
