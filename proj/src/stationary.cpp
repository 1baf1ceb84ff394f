#include "swarmcap/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "swarmcap/errors.hpp"

namespace swarmcap {

namespace {

// Column-oriented (incoming-edge) view; the balance equations read
// pi[j] * exit[j] = sum_i pi[i] q[i][j], so sweeps walk columns.
struct Csc {
    std::vector<std::size_t> col_begin;
    std::vector<std::uint32_t> row;
    std::vector<double> rate;
};

Csc to_csc(const GeneratorMatrix& matrix) {
    const std::size_t n = matrix.dimension;
    Csc csc;
    csc.col_begin.assign(n + 1, 0);
    for (const auto& e : matrix.entries) csc.col_begin[e.col + 1]++;
    for (std::size_t i = 0; i < n; ++i) csc.col_begin[i + 1] += csc.col_begin[i];
    csc.row.resize(matrix.entries.size());
    csc.rate.resize(matrix.entries.size());
    std::vector<std::size_t> cursor(csc.col_begin.begin(), csc.col_begin.end() - 1);
    for (const auto& e : matrix.entries) {
        const std::size_t k = cursor[e.col]++;
        csc.row[k] = e.row;
        csc.rate[k] = e.rate;
    }
    return csc;
}

double residual_inf(const Csc& csc, const std::vector<double>& exit_rate,
                    const std::vector<double>& pi) {
    double worst = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double acc = -pi[j] * exit_rate[j];
        for (std::size_t k = csc.col_begin[j]; k < csc.col_begin[j + 1]; ++k)
            acc += pi[csc.row[k]] * csc.rate[k];
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

// One Gauss-Seidel sweep over the balance equations, followed by
// renormalization (the system is singular; the sweep preserves direction).
void smoothing_sweep(const Csc& csc, const std::vector<double>& exit_rate,
                     std::vector<double>& pi) {
    const std::size_t n = pi.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (exit_rate[j] <= 0.0) continue;
        double acc = 0.0;
        for (std::size_t k = csc.col_begin[j]; k < csc.col_begin[j + 1]; ++k) {
            const std::uint32_t i = csc.row[k];
            if (i != j) acc += pi[i] * csc.rate[k];
        }
        pi[j] = acc / exit_rate[j];
    }
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& p : pi) p /= total;
}

// Grassmann-Taksar-Heyman elimination on the dense in-class rate matrix.
// Subtraction-free, so no tolerance knob and no pivoting.
std::vector<double> gth_solve(std::vector<double>& a, std::size_t m) {
    auto at = [&a, m](std::size_t i, std::size_t j) -> double& { return a[i * m + j]; };
    for (std::size_t k = m; k-- > 1;) {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) total += at(k, j);
        if (!(total > 0.0))
            throw NotConverged("gth: eliminated state has no predecessors left");
        for (std::size_t i = 0; i < k; ++i) at(i, k) /= total;
        for (std::size_t i = 0; i < k; ++i) {
            const double f = at(i, k);
            if (f == 0.0) continue;
            double* dst = &at(i, 0);
            const double* src = &at(k, 0);
            // Diagonal slots are never read afterwards, so the j == i term
            // may land there harmlessly; keeps the loop contiguous.
            for (std::size_t j = 0; j < k; ++j) dst[j] += f * src[j];
        }
    }
    std::vector<double> pi(m, 0.0);
    pi[0] = 1.0;
    for (std::size_t k = 1; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += pi[i] * at(i, k);
        pi[k] = acc;
    }
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& p : pi) p /= total;
    return pi;
}

// Iterative aggregation-disaggregation (Koury-McAllister-Stewart): solve the
// aggregate chain over the partition groups exactly, spread each group's
// mass by the current within-group weights, then smooth. The aggregate
// solve supplies the global correction that plain sweeps cannot deliver on
// nearly-decoupled chains.
std::vector<double> aggregation_solve(const GeneratorMatrix& matrix,
                                      const std::vector<std::uint32_t>& members,
                                      const std::vector<std::uint32_t>& local,
                                      const std::vector<std::uint32_t>& partition,
                                      const SolveOptions& options, std::size_t& iterations) {
    const std::size_t m = members.size();

    // Sub-chain structures restricted to the class, in local indexing.
    GeneratorMatrix sub;
    sub.dimension = m;
    sub.exit_rate.reserve(m);
    for (const std::uint32_t g : members) sub.exit_rate.push_back(matrix.exit_rate[g]);
    for (const auto& e : matrix.entries)
        if (local[e.row] != std::uint32_t(-1) && local[e.col] != std::uint32_t(-1))
            sub.entries.push_back({local[e.row], local[e.col], e.rate});
    const Csc csc = to_csc(sub);

    // Compress the partition hint to dense group ids over the class.
    std::vector<std::uint32_t> group(m, 0);
    std::size_t group_count = 1;
    if (!partition.empty()) {
        std::vector<std::uint32_t> keys;
        keys.reserve(m);
        for (const std::uint32_t g : members) keys.push_back(partition[g]);
        std::vector<std::uint32_t> sorted(keys);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (std::size_t i = 0; i < m; ++i)
            group[i] = static_cast<std::uint32_t>(
                std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
        group_count = sorted.size();
    }

    std::vector<std::uint32_t> group_size(group_count, 0);
    for (std::size_t i = 0; i < m; ++i) group_size[group[i]]++;

    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    std::vector<double> weights(m), group_mass(group_count);
    std::vector<double> aggregate(group_count * group_count);

    constexpr std::size_t kSweepsPerCycle = 3;
    const std::size_t max_cycles = 1000;
    double residual = residual_inf(csc, sub.exit_rate, pi);
    for (std::size_t cycle = 0; residual > options.tolerance; ++cycle) {
        if (cycle >= max_cycles || iterations >= options.max_iterations)
            throw NotConverged("solve_stationary: aggregation residual " +
                               std::to_string(residual) + " above tolerance after budget");

        if (group_count > 1) {
            std::fill(group_mass.begin(), group_mass.end(), 0.0);
            for (std::size_t i = 0; i < m; ++i) group_mass[group[i]] += pi[i];
            for (std::size_t i = 0; i < m; ++i)
                weights[i] = group_mass[group[i]] > 0.0
                                 ? pi[i] / group_mass[group[i]]
                                 : 1.0 / static_cast<double>(group_size[group[i]]);

            std::fill(aggregate.begin(), aggregate.end(), 0.0);
            for (const auto& e : sub.entries) {
                const std::uint32_t g = group[e.row];
                const std::uint32_t h = group[e.col];
                if (g != h) aggregate[g * group_count + h] += weights[e.row] * e.rate;
            }
            const std::vector<double> xi = gth_solve(aggregate, group_count);
            for (std::size_t i = 0; i < m; ++i) pi[i] = xi[group[i]] * weights[i];
        }

        for (std::size_t s = 0; s < kSweepsPerCycle; ++s)
            smoothing_sweep(csc, sub.exit_rate, pi);
        iterations += kSweepsPerCycle + 1;
        residual = residual_inf(csc, sub.exit_rate, pi);
    }
    return pi;
}

} // namespace

ComponentSplit strongly_connected_components(const GeneratorMatrix& matrix) {
    const std::size_t n = matrix.dimension;

    std::vector<std::size_t> row_begin(n + 1, 0);
    std::vector<std::uint32_t> cols(matrix.entries.size());
    for (const auto& e : matrix.entries) row_begin[e.row + 1]++;
    for (std::size_t i = 0; i < n; ++i) row_begin[i + 1] += row_begin[i];
    {
        std::vector<std::size_t> cursor(row_begin.begin(), row_begin.end() - 1);
        for (const auto& e : matrix.entries) cols[cursor[e.row]++] = e.col;
    }

    constexpr std::uint32_t kUnset = std::uint32_t(-1);
    std::vector<std::uint32_t> disc(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    struct Frame {
        std::uint32_t v;
        std::size_t edge;
    };
    std::vector<Frame> call;

    ComponentSplit split;
    split.component.assign(n, kUnset);
    std::uint32_t timer = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (disc[root] != kUnset) continue;
        disc[root] = low[root] = timer++;
        stack.push_back(root);
        on_stack[root] = true;
        call.push_back({root, row_begin[root]});
        while (!call.empty()) {
            const std::uint32_t v = call.back().v;
            if (call.back().edge < row_begin[v + 1]) {
                const std::uint32_t u = cols[call.back().edge++];
                if (disc[u] == kUnset) {
                    disc[u] = low[u] = timer++;
                    stack.push_back(u);
                    on_stack[u] = true;
                    call.push_back({u, row_begin[u]});
                } else if (on_stack[u]) {
                    low[v] = std::min(low[v], disc[u]);
                }
            } else {
                if (low[v] == disc[v]) {
                    const std::uint32_t id = static_cast<std::uint32_t>(split.count++);
                    while (true) {
                        const std::uint32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        split.component[w] = id;
                        if (w == v) break;
                    }
                }
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }

    split.closed.assign(split.count, true);
    for (const auto& e : matrix.entries)
        if (split.component[e.row] != split.component[e.col])
            split.closed[split.component[e.row]] = false;
    return split;
}

StationaryDistribution solve_stationary(const GeneratorMatrix& matrix,
                                        const SolveOptions& options) {
    const std::size_t n = matrix.dimension;
    if (n == 0) throw std::invalid_argument("solve_stationary: empty generator");
    if (!options.partition.empty() && options.partition.size() != n)
        throw std::invalid_argument("solve_stationary: partition hint size mismatch");
    for (const auto& e : matrix.entries)
        if (!(e.rate >= 0.0) || e.row == e.col)
            throw std::invalid_argument("solve_stationary: invalid generator entry");

    const ComponentSplit split = strongly_connected_components(matrix);
    std::size_t closed_id = split.count;
    std::size_t closed_classes = 0;
    for (std::size_t c = 0; c < split.count; ++c) {
        if (split.closed[c]) {
            ++closed_classes;
            closed_id = c;
        }
    }
    if (closed_classes != 1)
        throw ReducibleChain("solve_stationary: " + std::to_string(closed_classes) +
                             " closed communicating classes (expected 1)");

    // Members of the recurrent class; transient states keep probability zero.
    std::vector<std::uint32_t> members;
    std::vector<std::uint32_t> local(n, std::uint32_t(-1));
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
        if (split.component[i] == closed_id) {
            local[i] = static_cast<std::uint32_t>(members.size());
            members.push_back(i);
        }
    }
    const std::size_t m = members.size();

    StationaryDistribution result;
    result.probabilities.assign(n, 0.0);

    std::vector<double> class_pi;
    if (m == 1) {
        class_pi.assign(1, 1.0);
    } else if (m <= options.gth_max_states) {
        std::vector<double> dense(m * m, 0.0);
        for (const auto& e : matrix.entries) {
            if (split.component[e.row] != closed_id) continue;
            dense[static_cast<std::size_t>(local[e.row]) * m + local[e.col]] += e.rate;
        }
        class_pi = gth_solve(dense, m);
    } else {
        class_pi = aggregation_solve(matrix, members, local, options.partition, options,
                                     result.iterations);
    }

    for (std::size_t k = 0; k < m; ++k) result.probabilities[members[k]] = class_pi[k];
    const double total =
        std::accumulate(result.probabilities.begin(), result.probabilities.end(), 0.0);
    for (double& p : result.probabilities) p /= total;
    result.residual = residual_inf(to_csc(matrix), matrix.exit_rate, result.probabilities);
    return result;
}

} // namespace swarmcap
