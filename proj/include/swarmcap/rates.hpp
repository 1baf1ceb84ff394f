#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "swarmcap/params.hpp"
#include "swarmcap/state.hpp"

namespace swarmcap {

// One enabled transfer class: some peer with signature `from` receives
// `block`. When the peer was one block short (`completes`), the event is a
// download completion: the peer departs and a fresh empty peer arrives, or,
// with lingering enabled, the peer moves to the seed slot.
struct Transition {
    Signature from;
    int block = 0;
    double rate = 0.0;   // aggregate publisher + peer rate for this class
    bool completes = false;
};

// Caches the state-dependent quantities the policy formulas share (replica
// counts, the most-deprived set, per-donor neighbor pools) so that sweeping
// all (signature, block) pairs of one state stays cheap. The referenced
// state and params must outlive the context.
class RateContext {
public:
    RateContext(const SwarmState& state, const ModelParams& params);

    // Aggregate rate at which peers with signature `c` receive `block` from
    // other peers (seeds included as donors). Zero when no donor holds the
    // block or shielding suppresses service to newcomers.
    double peer_rate(Signature c, int block) const;

    // Aggregate rate at which the publisher delivers `block` to peers with
    // signature `c`, per the configured publisher policy.
    double publisher_rate(Signature c, int block) const;

    double transition_rate(Signature c, int block) const {
        return publisher_rate(c, block) + peer_rate(c, block);
    }

    // gamma * seeds; zero unless lingering is enabled.
    double seed_departure_rate() const;

    // block is among the least-replicated blocks useful to `c`.
    bool in_rarest_set(Signature c, int block) const;
    int rarest_set_size(Signature c) const;

    const ReplicaProfile& replicas() const { return replicas_; }
    const SwarmState& state() const { return *state_; }
    const ModelParams& params() const { return *params_; }

private:
    const SwarmState* state_;
    const ModelParams* params_;
    ReplicaProfile replicas_;
    int deprived_size_ = -1;          // min |C| over signatures with peers
    std::uint64_t deprived_total_ = 0;  // peers across the most-deprived signatures
    // Neighbor pool size per donor mask (RandomUsefulPeer counts only peers
    // the donor can help; shielding removes newcomers from every pool).
    std::vector<double> neighbor_pool_;
};

// Spec-level entry points; validate the (c, block) pair and evaluate on a
// fresh context. Hot paths should construct one RateContext per state.
double peer_rate(Signature c, int block, const SwarmState& state, const ModelParams& params);
double publisher_rate(Signature c, int block, const SwarmState& state, const ModelParams& params);

// Invokes fn for every (signature, block) class with nonzero rate, in
// ascending (mask, block) order. Seed departures are not included; query
// seed_departure_rate() separately.
void for_each_transition(const RateContext& ctx, const std::function<void(const Transition&)>& fn);

// Successor state when one peer of class `t.from` receives `t.block`.
SwarmState apply_transition(const SwarmState& state, const Transition& t, const ModelParams& params);

// Successor state when one seed departs (a fresh empty peer arrives).
SwarmState apply_seed_departure(const SwarmState& state);

// Total event rate out of `state`, seed departures included. Equals the
// negated generator diagonal except for completion self-loops (K = 1).
double total_event_rate(const SwarmState& state, const ModelParams& params);

} // namespace swarmcap
