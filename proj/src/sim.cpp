#include "swarmcap/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "swarmcap/rates.hpp"

namespace swarmcap {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Private stream per (seed, replication); identical inputs give identical
// trajectories regardless of how replications are scheduled.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t replication) {
    return mix64(mix64(base) ^ (replication + 1));
}

// Uniform in (0, 1), deterministic given the engine state.
double uniform01(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

SwarmState initial_state(const SimConfig& config) {
    const ModelParams& p = config.params;
    switch (config.initial) {
        case InitialCondition::AllEmpty:
            return SwarmState::all_empty(p.blocks, static_cast<std::uint32_t>(p.peers));
        case InitialCondition::OneClub: {
            // Everyone holds all blocks but block 1, except one empty peer.
            SwarmState s(p.blocks);
            if (p.blocks < 2)
                throw std::invalid_argument("one-club start needs at least two blocks");
            s.counts[Signature::all_but(p.blocks, 1).mask] =
                static_cast<std::uint32_t>(p.peers - 1);
            s.counts[0] = 1;
            return s;
        }
        case InitialCondition::Custom: {
            if (!config.custom_initial)
                throw std::invalid_argument("custom initial condition requires a state");
            const SwarmState& s = *config.custom_initial;
            if (s.blocks() != p.blocks ||
                s.population() != static_cast<std::uint64_t>(p.peers))
                throw std::invalid_argument("custom initial state does not match params");
            return s;
        }
    }
    throw std::invalid_argument("unknown initial condition");
}

// Rarest block, ties resolved to the lowest index.
int rarest_block(const ReplicaProfile& profile) {
    int best = 1;
    for (int j = 2; j <= static_cast<int>(profile.replicas.size()); ++j)
        if (profile.of(j) < profile.of(best)) best = j;
    return best;
}

// Peers holding exactly K-1 blocks, all missing the current rarest block.
std::uint32_t one_club_count(const SwarmState& state, const ReplicaProfile& profile) {
    const int blocks = state.blocks();
    const int rarest = rarest_block(profile);
    return state.counts[Signature::all_but(blocks, rarest).mask];
}

// fraction * peers with exact integer comparisons when the product is one.
double club_threshold(double fraction, int peers) {
    double target = fraction * static_cast<double>(peers);
    const double rounded = std::round(target);
    if (std::abs(target - rounded) < 1e-9) target = rounded;
    return target;
}

struct StepOutcome {
    double dt = 0.0;
    EventRecord record;
};

class Simulator {
public:
    Simulator(const SimConfig& config, int replication)
        : params_(config.params),
          state_(initial_state(config)),
          eng_(stream_seed(config.seed, static_cast<std::uint64_t>(replication))) {}

    const SwarmState& state() const { return state_; }
    double now() const { return now_; }

    // Samples the next event (exponential holding time, categorical pick over
    // the enabled transition classes) and applies it.
    StepOutcome step() {
        scratch_.clear();
        RateContext ctx(state_, params_);
        double total = 0.0;
        for_each_transition(ctx, [this, &total](const Transition& t) {
            scratch_.push_back(t);
            total += t.rate;
        });
        const double seed_rate = ctx.seed_departure_rate();
        total += seed_rate;
        if (!(total > 0.0))
            throw std::logic_error("simulate: no enabled event (stalled chain)");

        const double dt = -std::log(uniform01(eng_)) / total;
        now_ += dt;

        StepOutcome out;
        out.dt = dt;
        out.record.time = now_;

        double pick = uniform01(eng_) * total;
        for (std::size_t k = 0; k < scratch_.size(); ++k) {
            pick -= scratch_[k].rate;
            // The last class absorbs rounding leftovers when there is no
            // seed-departure mass after it.
            if (pick <= 0.0 || (seed_rate == 0.0 && k + 1 == scratch_.size())) {
                const Transition& t = scratch_[k];
                state_ = apply_transition(state_, t, params_);
                out.record.from_mask = t.from.mask;
                out.record.block = static_cast<std::uint8_t>(t.block);
                out.record.kind = t.completes ? 1 : 0;
                return out;
            }
        }
        state_ = apply_seed_departure(state_);
        out.record.kind = 2;
        return out;
    }

private:
    ModelParams params_;
    SwarmState state_;
    std::mt19937_64 eng_;
    double now_ = 0.0;
    std::vector<Transition> scratch_;
};

// True when the event counts as a system departure under these params.
bool is_departure(const EventRecord& record, const ModelParams& params) {
    return params.lingering() ? record.kind == 2 : record.kind == 1;
}

void run_parallel(int jobs, const std::function<void(int)>& job) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers = std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(jobs));
    if (workers <= 1) {
        for (int r = 0; r < jobs; ++r) job(r);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            while (true) {
                const int r = next.fetch_add(1);
                if (r >= jobs) return;
                job(r);
            }
        });
    for (std::thread& t : pool) t.join();
}

} // namespace

void SimConfig::validate() const {
    params.validate();
    if (!(horizon > 0)) throw std::invalid_argument("horizon: must be positive");
    if (warmup < 0 || warmup >= horizon)
        throw std::invalid_argument("warmup: must satisfy 0 <= warmup < horizon");
    if (replications < 1) throw std::invalid_argument("replications: must be >= 1");
    if (initial == InitialCondition::Custom && !custom_initial)
        throw std::invalid_argument("initial: custom condition requires a state");
}

Trajectory simulate(const SimConfig& config, int replication, bool keep_events) {
    config.validate();
    Simulator sim(config, replication);
    Trajectory trajectory;
    while (true) {
        const StepOutcome out = sim.step();
        if (out.record.time > config.horizon) break;
        if (keep_events) trajectory.events.push_back(out.record);
        if (is_departure(out.record, config.params)) {
            trajectory.departures++;
            if (out.record.time > config.warmup) trajectory.departures_after_warmup++;
        }
    }
    trajectory.final_state = sim.state();
    return trajectory;
}

ThroughputEstimate estimate_throughput(const SimConfig& config) {
    config.validate();
    if (config.replications < 2)
        throw std::invalid_argument("estimate_throughput: needs at least two replications");

    std::vector<double> rates(static_cast<std::size_t>(config.replications), 0.0);
    run_parallel(config.replications, [&](int r) {
        const Trajectory t = simulate(config, r, /*keep_events=*/false);
        rates[static_cast<std::size_t>(r)] =
            static_cast<double>(t.departures_after_warmup) / (config.horizon - config.warmup);
    });

    const double n = static_cast<double>(rates.size());
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= n;
    double variance = 0.0;
    for (double r : rates) variance += (r - mean) * (r - mean);
    variance /= (n - 1.0);

    boost::math::students_t dist(n - 1.0);
    const double quantile = boost::math::quantile(dist, 0.975);

    ThroughputEstimate estimate;
    estimate.mean = mean;
    estimate.ci_halfwidth = quantile * std::sqrt(variance / n);
    estimate.replications = config.replications;
    return estimate;
}

double TransientResult::probability_by(double t) const {
    std::size_t hits = 0;
    for (const TransientSample& s : samples)
        if (!s.censored && s.time <= t) ++hits;
    return samples.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples.size());
}

namespace {

TransientResult run_transient(const SimConfig& config,
                              const std::function<bool(const SwarmState&)>& stopped,
                              const std::vector<double>& grid) {
    config.validate();
    TransientResult result;
    result.samples.assign(static_cast<std::size_t>(config.replications), {});

    run_parallel(config.replications, [&](int r) {
        Simulator sim(config, r);
        TransientSample sample;
        if (stopped(sim.state())) {
            sample.time = 0.0;
        } else {
            while (true) {
                const StepOutcome out = sim.step();
                if (out.record.time > config.horizon) {
                    sample.time = config.horizon;
                    sample.censored = true;
                    break;
                }
                if (stopped(sim.state())) {
                    sample.time = out.record.time;
                    break;
                }
            }
        }
        result.samples[static_cast<std::size_t>(r)] = sample;
    });

    result.grid = grid;
    if (result.grid.empty()) {
        const int points = 101;
        result.grid.reserve(points);
        for (int i = 0; i < points; ++i)
            result.grid.push_back(config.horizon * static_cast<double>(i) /
                                  static_cast<double>(points - 1));
    }
    result.cdf.reserve(result.grid.size());
    for (double t : result.grid) result.cdf.push_back(result.probability_by(t));
    for (const TransientSample& s : result.samples)
        if (s.censored) result.censored++;
    return result;
}

} // namespace

TransientResult time_to_one_club(const SimConfig& config, double fraction,
                                 const std::vector<double>& grid) {
    if (config.initial != InitialCondition::AllEmpty)
        throw std::invalid_argument("time_to_one_club: requires the all-empty start");
    const double threshold = club_threshold(fraction, config.params.peers);
    return run_transient(
        config,
        [threshold](const SwarmState& s) {
            return static_cast<double>(one_club_count(s, replica_profile(s))) >= threshold;
        },
        grid);
}

TransientResult time_to_leave_one_club(const SimConfig& config, double fraction,
                                       const std::vector<double>& grid) {
    if (config.initial != InitialCondition::OneClub)
        throw std::invalid_argument("time_to_leave_one_club: requires the one-club start");
    const double threshold = club_threshold(fraction, config.params.peers);
    return run_transient(
        config,
        [threshold](const SwarmState& s) {
            return static_cast<double>(one_club_count(s, replica_profile(s))) < threshold;
        },
        grid);
}

} // namespace swarmcap
