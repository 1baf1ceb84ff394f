#include "swarmcap/rates.hpp"

#include <bit>
#include <limits>

#include "swarmcap/errors.hpp"

namespace swarmcap {

namespace {

inline int gap_size(Signature donor, Signature recipient) {
    return std::popcount(donor.mask & ~recipient.mask);
}

} // namespace

RateContext::RateContext(const SwarmState& state, const ModelParams& params)
    : state_(&state), params_(&params), replicas_(replica_profile(state)) {
    const std::uint32_t signature_slots = static_cast<std::uint32_t>(state.counts.size());

    // Most-deprived set: smallest signature cardinality with peers present.
    for (std::uint32_t mask = 0; mask < signature_slots; ++mask) {
        if (state.counts[mask] == 0) continue;
        const int card = std::popcount(mask);
        if (deprived_size_ < 0 || card < deprived_size_) deprived_size_ = card;
    }
    if (deprived_size_ >= 0) {
        for (std::uint32_t mask = 0; mask < signature_slots; ++mask)
            if (state.counts[mask] > 0 && std::popcount(mask) == deprived_size_)
                deprived_total_ += state.counts[mask];
    }

    // Neighbor pool per donor mask; index signature_slots holds the seed
    // donor pool (donors with every block).
    const std::uint32_t newcomers = state.counts[0];
    neighbor_pool_.assign(signature_slots + 1, 0.0);
    if (params.peer_policy == PeerPolicy::RandomPeer) {
        double pool = static_cast<double>(params.peers) - 1.0;
        if (params.shield_newcomers) pool -= static_cast<double>(newcomers);
        for (double& p : neighbor_pool_) p = pool;
    } else {
        // Uniform over peers the donor can actually help. A donor never
        // helps peers with its own signature, so no self-exclusion term.
        // Index signature_slots doubles as the seed donor (full mask).
        for (std::uint32_t donor = 1; donor <= signature_slots; ++donor) {
            const std::uint32_t donor_mask = donor;
            double pool = 0.0;
            const std::uint32_t first =
                params.shield_newcomers ? 1 : 0;  // shielded newcomers are invisible
            for (std::uint32_t c = first; c < signature_slots; ++c)
                if (state.counts[c] > 0 && (donor_mask & ~c) != 0)
                    pool += static_cast<double>(state.counts[c]);
            neighbor_pool_[donor] = pool;
        }
    }
}

double RateContext::peer_rate(Signature c, int block) const {
    if (c.contains(block))
        throw InvalidTransition("peer_rate: block " + std::to_string(block) +
                                " already held by recipient");
    const std::uint32_t recipients = state_->counts[c.mask];
    if (recipients == 0) return 0.0;
    if (params_->shield_newcomers && c.empty()) return 0.0;

    const int blocks = params_->blocks;
    const std::uint32_t signature_slots = static_cast<std::uint32_t>(state_->counts.size());
    const std::uint32_t block_bit = std::uint32_t{1} << (block - 1);

    double sum = 0.0;
    for (std::uint32_t donor = 1; donor < signature_slots; ++donor) {
        if ((donor & block_bit) == 0 || state_->counts[donor] == 0) continue;
        const double pool = neighbor_pool_[donor];
        if (pool <= 0.0) continue;
        const double donor_rate =
            std::popcount(donor) == blocks - 1 ? params_->endgame_rate : params_->peer_rate;
        sum += donor_rate * static_cast<double>(state_->counts[donor]) /
               (static_cast<double>(gap_size(Signature{donor}, c)) * pool);
    }
    if (state_->seeds > 0) {
        // Seeds hold every block and serve at the full peer rate; the
        // endgame reduction applies only to the one-block-short stage.
        const double pool = neighbor_pool_[signature_slots];
        if (pool > 0.0)
            sum += params_->peer_rate * static_cast<double>(state_->seeds) /
                   (static_cast<double>(blocks - c.size()) * pool);
    }
    return static_cast<double>(recipients) * sum;
}

bool RateContext::in_rarest_set(Signature c, int block) const {
    std::uint32_t rarest = std::numeric_limits<std::uint32_t>::max();
    for (int j = 1; j <= params_->blocks; ++j)
        if (!c.contains(j)) rarest = std::min(rarest, replicas_.of(j));
    return replicas_.of(block) == rarest;
}

int RateContext::rarest_set_size(Signature c) const {
    std::uint32_t rarest = std::numeric_limits<std::uint32_t>::max();
    int count = 0;
    for (int j = 1; j <= params_->blocks; ++j) {
        if (c.contains(j)) continue;
        const std::uint32_t r = replicas_.of(j);
        if (r < rarest) {
            rarest = r;
            count = 1;
        } else if (r == rarest) {
            ++count;
        }
    }
    return count;
}

double RateContext::publisher_rate(Signature c, int block) const {
    if (c.contains(block))
        throw InvalidTransition("publisher_rate: block " + std::to_string(block) +
                                " already held by recipient");
    const std::uint32_t recipients = state_->counts[c.mask];
    if (recipients == 0) return 0.0;

    const double population = static_cast<double>(params_->peers);
    const double share = params_->publisher_capacity * static_cast<double>(recipients);
    switch (params_->publisher_policy) {
        case PublisherPolicy::RandomPeerRandomBlock:
            return share / (population * static_cast<double>(params_->blocks - c.size()));
        case PublisherPolicy::RandomPeerRarestBlock:
            if (!in_rarest_set(c, block)) return 0.0;
            return share / (population * static_cast<double>(rarest_set_size(c)));
        case PublisherPolicy::MostDeprivedRarestBlock:
            if (c.size() != deprived_size_ || !in_rarest_set(c, block)) return 0.0;
            return share / (static_cast<double>(deprived_total_) *
                            static_cast<double>(rarest_set_size(c)));
    }
    return 0.0;
}

double RateContext::seed_departure_rate() const {
    if (!params_->lingering() || state_->seeds == 0) return 0.0;
    return params_->linger_rate * static_cast<double>(state_->seeds);
}

double peer_rate(Signature c, int block, const SwarmState& state, const ModelParams& params) {
    return RateContext(state, params).peer_rate(c, block);
}

double publisher_rate(Signature c, int block, const SwarmState& state, const ModelParams& params) {
    return RateContext(state, params).publisher_rate(c, block);
}

void for_each_transition(const RateContext& ctx,
                         const std::function<void(const Transition&)>& fn) {
    const SwarmState& state = ctx.state();
    const int blocks = ctx.params().blocks;
    for (std::uint32_t mask = 0; mask < state.counts.size(); ++mask) {
        if (state.counts[mask] == 0) continue;
        const Signature sig{mask};
        const bool completes = sig.size() == blocks - 1;
        for (int block = 1; block <= blocks; ++block) {
            if (sig.contains(block)) continue;
            const double rate = ctx.transition_rate(sig, block);
            if (rate > 0.0) fn(Transition{sig, block, rate, completes});
        }
    }
}

SwarmState apply_transition(const SwarmState& state, const Transition& t,
                            const ModelParams& params) {
    SwarmState next = state;
    next.counts[t.from.mask] -= 1;
    if (!t.completes)
        next.counts[t.from.with(t.block).mask] += 1;
    else if (params.lingering())
        next.seeds += 1;
    else
        next.counts[0] += 1;  // departure coupled to a fresh empty arrival
    return next;
}

SwarmState apply_seed_departure(const SwarmState& state) {
    SwarmState next = state;
    next.seeds -= 1;
    next.counts[0] += 1;
    return next;
}

double total_event_rate(const SwarmState& state, const ModelParams& params) {
    RateContext ctx(state, params);
    double total = ctx.seed_departure_rate();
    for_each_transition(ctx, [&total](const Transition& t) { total += t.rate; });
    return total;
}

} // namespace swarmcap
