#include "swarmcap/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "swarmcap/errors.hpp"

namespace swarmcap {

double GeneratorMatrix::max_row_sum_error() const {
    std::vector<double> row_sum(dimension, 0.0);
    for (const Entry& e : entries) row_sum[e.row] += e.rate;
    double worst = 0.0;
    for (std::size_t i = 0; i < dimension; ++i)
        worst = std::max(worst, std::abs(row_sum[i] - exit_rate[i]));
    return worst;
}

std::size_t GeneratorBuild::index_of(const SwarmState& state) const {
    const SwarmState key = lumped ? lump_state(state) : state;
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == key) return i;
    return npos;
}

GeneratorBuild build_generator(const ModelParams& params, bool lumped,
                               const EnumerationOptions& options) {
    GeneratorBuild build;
    build.lumped = lumped;
    build.states = lumped ? enumerate_lumped_states(params, options)
                          : enumerate_states(params, options);

    std::unordered_map<SwarmState, std::uint32_t, SwarmStateHash> index;
    index.reserve(build.states.size() * 2);
    for (std::uint32_t i = 0; i < build.states.size(); ++i) index.emplace(build.states[i], i);

    const std::size_t n = build.states.size();
    build.matrix.dimension = n;
    build.matrix.exit_rate.assign(n, 0.0);
    build.departure_rate.assign(n, 0.0);

    std::vector<std::pair<std::uint32_t, double>> row;  // (successor, rate) scratch
    for (std::uint32_t from = 0; from < n; ++from) {
        const SwarmState& state = build.states[from];
        RateContext ctx(state, params);
        row.clear();

        for_each_transition(ctx, [&](const Transition& t) {
            SwarmState successor = apply_transition(state, t, params);
            if (lumped) successor = lump_state(successor);
            const auto it = index.find(successor);
            if (it == index.end())
                throw std::logic_error("build_generator: successor outside enumerated space");
            const std::uint32_t to = it->second;
            // With lingering, a completion parks the peer in the seed slot;
            // the system departure happens later, at the seed's exit.
            if (t.completes && !params.lingering()) build.departure_rate[from] += t.rate;
            if (to != from) row.emplace_back(to, t.rate);
            // Completion self-loops (K = 1) count as departures but leave
            // the generator untouched.
        });

        const double seed_rate = ctx.seed_departure_rate();
        if (seed_rate > 0.0) {
            const SwarmState successor = apply_seed_departure(state);
            const std::uint32_t to = index.at(lumped ? lump_state(successor) : successor);
            build.departure_rate[from] += seed_rate;
            if (to != from) row.emplace_back(to, seed_rate);
        }

        std::sort(row.begin(), row.end());
        double exit = 0.0;
        for (std::size_t k = 0; k < row.size();) {
            double rate = row[k].second;
            std::size_t next = k + 1;
            while (next < row.size() && row[next].first == row[k].first) {
                rate += row[next].second;  // parallel lumped transitions merge
                ++next;
            }
            build.matrix.entries.push_back({from, row[k].first, rate});
            exit += rate;
            k = next;
        }
        build.matrix.exit_rate[from] = exit;
    }
    return build;
}

GeneratorBuild restrict_to_reachable(const GeneratorBuild& build, std::size_t start) {
    const std::size_t n = build.matrix.dimension;

    // CSR-style adjacency over the entry list (entries are row-sorted).
    std::vector<std::size_t> row_begin(n + 1, 0);
    for (const auto& e : build.matrix.entries) row_begin[e.row + 1]++;
    for (std::size_t i = 0; i < n; ++i) row_begin[i + 1] += row_begin[i];

    std::vector<std::uint32_t> order;  // BFS order = new index -> old index
    std::vector<std::uint32_t> remap(n, std::uint32_t(-1));
    order.push_back(static_cast<std::uint32_t>(start));
    remap[start] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::uint32_t u = order[head];
        for (std::size_t k = row_begin[u]; k < row_begin[u + 1]; ++k) {
            const std::uint32_t v = build.matrix.entries[k].col;
            if (remap[v] == std::uint32_t(-1)) {
                remap[v] = static_cast<std::uint32_t>(order.size());
                order.push_back(v);
            }
        }
    }

    GeneratorBuild restricted;
    restricted.lumped = build.lumped;
    restricted.states.reserve(order.size());
    restricted.departure_rate.reserve(order.size());
    restricted.matrix.dimension = order.size();
    restricted.matrix.exit_rate.reserve(order.size());
    for (const std::uint32_t old : order) {
        restricted.states.push_back(build.states[old]);
        restricted.departure_rate.push_back(build.departure_rate[old]);
        restricted.matrix.exit_rate.push_back(build.matrix.exit_rate[old]);
    }
    for (const auto& e : build.matrix.entries) {
        if (remap[e.row] == std::uint32_t(-1)) continue;
        restricted.matrix.entries.push_back({remap[e.row], remap[e.col], e.rate});
    }
    std::sort(restricted.matrix.entries.begin(), restricted.matrix.entries.end(),
              [](const GeneratorMatrix::Entry& a, const GeneratorMatrix::Entry& b) {
                  return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    return restricted;
}

} // namespace swarmcap
