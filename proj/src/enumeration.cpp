#include "swarmcap/enumeration.hpp"

#include <functional>
#include <unordered_set>

#include "swarmcap/errors.hpp"

namespace swarmcap {

namespace {

// C(n, k) with saturation at 2^64-1.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    constexpr std::uint64_t kMax = ~std::uint64_t{0};
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t factor = n - k + i;
        if (result > kMax / factor) return kMax;
        result = result * factor / i;  // exact: the running product of i consecutive integers
    }
    return result;
}

std::uint64_t slot_count(const ModelParams& params) {
    const std::uint64_t signatures = (std::uint64_t{1} << params.blocks) - 1;
    return signatures + (params.lingering() ? 1 : 0);
}

// Streams every weak composition of the population over the slots in
// lexicographic order (slot 0 varies slowest), without materializing the
// full list.
void for_each_composition(std::size_t slots, std::uint32_t population,
                          const std::function<void(const std::vector<std::uint32_t>&)>& emit) {
    std::vector<std::uint32_t> slot(slots, 0);
    struct Frame {
        std::size_t index;
        std::uint32_t remaining;
        std::uint32_t next_take;
    };
    std::vector<Frame> stack;
    stack.push_back({0, population, 0});
    while (!stack.empty()) {
        Frame frame = stack.back();
        if (frame.index + 1 == slots) {
            slot[frame.index] = frame.remaining;
            emit(slot);
            stack.pop_back();
            continue;
        }
        if (frame.next_take > frame.remaining) {
            stack.pop_back();
            continue;
        }
        slot[frame.index] = frame.next_take;
        stack.back().next_take++;
        stack.push_back({frame.index + 1, frame.remaining - frame.next_take, 0});
    }
}

SwarmState state_from_slots(const ModelParams& params, const std::vector<std::uint32_t>& slot) {
    SwarmState s(params.blocks);
    for (std::size_t i = 0; i < s.counts.size(); ++i) s.counts[i] = slot[i];
    if (params.lingering()) s.seeds = slot.back();
    return s;
}

} // namespace

std::uint64_t state_space_size(const ModelParams& params, const EnumerationOptions& options) {
    params.validate();
    const std::uint64_t slots = slot_count(params);
    const std::uint64_t population = static_cast<std::uint64_t>(params.peers);
    const std::uint64_t count = binomial_saturating(slots - 1 + population, population);
    if (count > options.max_states)
        throw EnumerationLimitExceeded(
            "state space has " + std::to_string(count) + " states (cap " +
            std::to_string(options.max_states) + "); raise the cap or use the simulator");
    return count;
}

std::vector<SwarmState> enumerate_states(const ModelParams& params,
                                         const EnumerationOptions& options) {
    const std::uint64_t expected = state_space_size(params, options);
    std::vector<SwarmState> states;
    states.reserve(static_cast<std::size_t>(expected));
    for_each_composition(static_cast<std::size_t>(slot_count(params)),
                         static_cast<std::uint32_t>(params.peers),
                         [&](const std::vector<std::uint32_t>& slot) {
                             states.push_back(state_from_slots(params, slot));
                         });
    return states;
}

std::vector<SwarmState> enumerate_lumped_states(const ModelParams& params,
                                                const EnumerationOptions& options) {
    state_space_size(params, options);  // cap check on the unlumped count
    std::vector<SwarmState> lumped;
    std::unordered_set<SwarmState, SwarmStateHash> seen;
    for_each_composition(static_cast<std::size_t>(slot_count(params)),
                         static_cast<std::uint32_t>(params.peers),
                         [&](const std::vector<std::uint32_t>& slot) {
                             SwarmState canonical =
                                 lump_state(state_from_slots(params, slot));
                             if (seen.insert(canonical).second)
                                 lumped.push_back(std::move(canonical));
                         });
    return lumped;
}

} // namespace swarmcap
