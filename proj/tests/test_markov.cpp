#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "swarmcap/errors.hpp"
#include "swarmcap/markov.hpp"
#include "swarmcap/rates.hpp"

using namespace swarmcap;

namespace {

SwarmState make_state(int blocks, const std::map<std::uint32_t, std::uint32_t>& counts) {
    SwarmState s(blocks);
    for (const auto& [mask, n] : counts) s.counts[mask] = n;
    return s;
}

ModelParams make_params(int blocks, int peers, double capacity, double mu, double mu_prime,
                        PublisherPolicy publisher = PublisherPolicy::RandomPeerRandomBlock,
                        PeerPolicy peer = PeerPolicy::RandomPeer) {
    ModelParams p;
    p.blocks = blocks;
    p.peers = peers;
    p.publisher_capacity = capacity;
    p.peer_rate = mu;
    p.endgame_rate = mu_prime;
    p.publisher_policy = publisher;
    p.peer_policy = peer;
    return p;
}

// Independent oracle: dense Gaussian elimination with partial pivoting on
// pi Q = 0 with the last equation replaced by sum(pi) = 1. Shares nothing
// with the GTH / aggregation implementation.
std::vector<double> dense_lu_stationary(const GeneratorMatrix& q) {
    const std::size_t n = q.dimension;
    std::vector<double> a(n * (n + 1), 0.0);
    auto at = [&a, n](std::size_t r, std::size_t c) -> double& { return a[r * (n + 1) + c]; };
    // Equation c: sum_i pi_i q_ic = 0; variables are pi_i.
    for (const auto& e : q.entries) at(e.col, e.row) += e.rate;
    for (std::size_t i = 0; i < n; ++i) at(i, i) -= q.exit_rate[i];
    for (std::size_t i = 0; i < n; ++i) at(n - 1, i) = 1.0;  // normalization row
    at(n - 1, n) = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        for (std::size_t c = 0; c <= n; ++c) std::swap(at(col, c), at(pivot, c));
        REQUIRE(std::abs(at(col, col)) > 1e-14);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = at(i, n) / at(i, i);
    return pi;
}

GeneratorMatrix toy_generator(std::size_t n,
                              const std::vector<GeneratorMatrix::Entry>& entries) {
    GeneratorMatrix q;
    q.dimension = n;
    q.entries = entries;
    q.exit_rate.assign(n, 0.0);
    for (const auto& e : entries) q.exit_rate[e.row] += e.rate;
    return q;
}

double pipeline_throughput(const ModelParams& params, bool lumped,
                           const SolveOptions& options = {}) {
    return solve_throughput(params, lumped, options).throughput;
}

} // namespace

TEST_CASE("peer rate: nobody can donate in the all-empty swarm") {
    const ModelParams p = make_params(3, 6, 1.0, 1.0, 1.0);
    const SwarmState s = make_state(3, {{0, 6}});
    for (int block = 1; block <= 3; ++block)
        CHECK(peer_rate(Signature::empty_set(), block, s, p) == 0.0);
}

TEST_CASE("peer rate matches the hand-evaluated two-peer case") {
    // K=2, N=2, one empty peer and one holding {1}: the donor serves block 1
    // at mu' (it is one block short) over a single-neighbor pool.
    const ModelParams p = make_params(2, 2, 1.0, 1.0, 1.0);
    const SwarmState s = make_state(2, {{0, 1}, {0b01, 1}});
    CHECK(peer_rate(Signature::empty_set(), 1, s, p) == doctest::Approx(1.0).epsilon(1e-12));

    ModelParams shielded = p;
    shielded.shield_newcomers = true;
    CHECK(peer_rate(Signature::empty_set(), 1, s, shielded) == 0.0);
}

TEST_CASE("peer rate rejects blocks the recipient already holds") {
    const ModelParams p = make_params(2, 2, 1.0, 1.0, 1.0);
    const SwarmState s = make_state(2, {{0b01, 2}});
    CHECK_THROWS_AS(peer_rate(Signature{0b01}, 1, s, p), InvalidTransition);
    CHECK_THROWS_AS(publisher_rate(Signature{0b01}, 1, s, p), InvalidTransition);
}

TEST_CASE("endgame donors serve at the reduced rate") {
    // Donor holds K-1 = 2 blocks, so it uploads at mu' = 0.25, not mu = 1.
    const ModelParams p = make_params(3, 2, 1.0, 1.0, 0.25);
    const SwarmState s = make_state(3, {{0, 1}, {0b011, 1}});
    // gap |S \ C| = 2, pool N-1 = 1: rate = 1 * (0.25 * 1 / (2 * 1)).
    CHECK(peer_rate(Signature::empty_set(), 1, s, p) == doctest::Approx(0.125));
}

TEST_CASE("publisher rate: uniform policy spreads over useful blocks") {
    const ModelParams p = make_params(3, 4, 2.0, 1.0, 1.0);
    const SwarmState s = make_state(3, {{0, 4}});
    for (int block = 1; block <= 3; ++block)
        CHECK(publisher_rate(Signature::empty_set(), block, s, p) ==
              doctest::Approx(2.0 / 3.0).epsilon(1e-12));  // U sigma / (N K)
}

TEST_CASE("publisher rate: rarest-block policy concentrates on the scarce block") {
    // K=2, replicas (5,1): block 2 is uniquely rarest for an empty peer.
    const ModelParams p =
        make_params(2, 7, 1.0, 1.0, 1.0, PublisherPolicy::RandomPeerRarestBlock);
    const SwarmState s = make_state(2, {{0, 1}, {0b01, 5}, {0b10, 1}});
    CHECK(publisher_rate(Signature::empty_set(), 2, s, p) == doctest::Approx(1.0 / 7.0));
    CHECK(publisher_rate(Signature::empty_set(), 1, s, p) == 0.0);
}

TEST_CASE("publisher rate: most-deprived policy ignores better-off peers") {
    const ModelParams p =
        make_params(3, 5, 1.0, 1.0, 1.0, PublisherPolicy::MostDeprivedRarestBlock);
    const SwarmState s = make_state(3, {{0, 2}, {0b001, 3}});
    // Peers holding one block are not most deprived while newcomers exist.
    CHECK(publisher_rate(Signature{0b001}, 2, s, p) == 0.0);
    // The two newcomers split U over the (single) rarest block each.
    CHECK(publisher_rate(Signature::empty_set(), 2, s, p) +
              publisher_rate(Signature::empty_set(), 3, s, p) ==
          doctest::Approx(1.0));
}

TEST_CASE("generator rows sum to zero for every policy pair") {
    for (PublisherPolicy publisher :
         {PublisherPolicy::RandomPeerRandomBlock, PublisherPolicy::RandomPeerRarestBlock,
          PublisherPolicy::MostDeprivedRarestBlock}) {
        for (PeerPolicy peer : {PeerPolicy::RandomPeer, PeerPolicy::RandomUsefulPeer}) {
            const ModelParams p = make_params(3, 5, 1.0, 0.5, 0.5, publisher, peer);
            for (bool lumped : {false, true}) {
                const GeneratorBuild build = build_generator(p, lumped);
                CHECK(build.matrix.max_row_sum_error() <= 1e-12);
                for (const auto& e : build.matrix.entries) CHECK(e.rate >= 0.0);
            }
        }
    }
}

TEST_CASE("single-block swarms behave like a client-server system") {
    for (PublisherPolicy publisher :
         {PublisherPolicy::RandomPeerRandomBlock, PublisherPolicy::RandomPeerRarestBlock,
          PublisherPolicy::MostDeprivedRarestBlock}) {
        const ModelParams p = make_params(1, 7, 2.5, 1.0, 1.0, publisher);
        const GeneratorBuild build = build_generator(p, false);
        REQUIRE(build.states.size() == 1);
        CHECK(build.departure_rate[0] == doctest::Approx(2.5));
        CHECK(pipeline_throughput(p, false) == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("solve_stationary: two-state birth-death balance") {
    const GeneratorMatrix q = toy_generator(2, {{0, 1, 1.0}, {1, 0, 3.0}});
    const StationaryDistribution pi = solve_stationary(q);
    CHECK(pi.probabilities[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(pi.probabilities[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pi.residual <= 1e-12);
}

TEST_CASE("solve_stationary: uniform cycle is uniform") {
    const GeneratorMatrix q = toy_generator(3, {{0, 1, 2.0}, {1, 2, 2.0}, {2, 0, 2.0}});
    const StationaryDistribution pi = solve_stationary(q);
    for (double p : pi.probabilities) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("solve_stationary rejects chains with two closed classes") {
    const GeneratorMatrix q =
        toy_generator(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
    CHECK_THROWS_AS(solve_stationary(q), ReducibleChain);
}

TEST_CASE("solve_stationary zeroes transient states") {
    // State 0 drains into the 1<->2 cycle and never returns.
    const GeneratorMatrix q =
        toy_generator(3, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 1, 1.0}});
    const StationaryDistribution pi = solve_stationary(q);
    CHECK(pi.probabilities[0] == 0.0);
    CHECK(pi.probabilities[1] == doctest::Approx(0.5));
    CHECK(pi.probabilities[2] == doctest::Approx(0.5));
}

TEST_CASE("stationary distribution matches an independent dense solve") {
    const ModelParams p = make_params(2, 2, 1.0, 1.0, 1.0);
    const GeneratorBuild build = build_generator(p, false);
    const std::size_t start =
        build.index_of(SwarmState::all_empty(2, 2));
    const GeneratorBuild reachable = restrict_to_reachable(build, start);
    const StationaryDistribution pi = solve_stationary(reachable.matrix);
    const std::vector<double> oracle = dense_lu_stationary(reachable.matrix);
    REQUIRE(pi.probabilities.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(pi.probabilities[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("aggregation path agrees with direct elimination") {
    // Force the iterative solver on a mid-size chain and cross-check GTH.
    const ModelParams p =
        make_params(3, 8, 1.0, 0.5, 0.5, PublisherPolicy::MostDeprivedRarestBlock);
    SolveOptions direct;
    SolveOptions iterative;
    iterative.gth_max_states = 1;
    const double a = pipeline_throughput(p, true, direct);
    const double b = pipeline_throughput(p, true, iterative);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("lumped and unlumped chains produce the same throughput") {
    const ModelParams p =
        make_params(3, 6, 1.0, 0.5, 0.5, PublisherPolicy::MostDeprivedRarestBlock);
    const double lumped = pipeline_throughput(p, true);
    const double unlumped = pipeline_throughput(p, false);
    CHECK(std::abs(lumped - unlumped) <= 1e-9);
}

TEST_CASE("reachability restriction is lossless when the full space is solvable") {
    // Under the uniform publisher every state communicates, so the full
    // composition space and the reachable restriction agree.
    const ModelParams p = make_params(2, 4, 1.0, 1.0, 1.0);
    const GeneratorBuild full = build_generator(p, false);
    const StationaryDistribution unrestricted = solve_stationary(full.matrix);
    const double full_throughput = throughput(unrestricted, full);
    CHECK(pipeline_throughput(p, false) == doctest::Approx(full_throughput).epsilon(1e-10));
}

TEST_CASE("most-deprived publisher beats the uniform one at moderate size") {
    ModelParams p = make_params(3, 15, 1.0, 0.5, 0.5);
    const double uniform = pipeline_throughput(p, true);
    p.publisher_policy = PublisherPolicy::MostDeprivedRarestBlock;
    const double deprived = pipeline_throughput(p, true);
    CHECK(deprived > uniform);
}

TEST_CASE("single-peer swarm is a staged renewal process") {
    // One peer collects K blocks from the publisher, each stage at rate U,
    // so departures happen at rate U / K.
    const ModelParams p = make_params(3, 1, 1.0, 0.7, 0.7);
    const PopulationSweep sweep = sweep_population(p, 1, 1);
    CHECK(sweep.points[0].throughput == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("population sweep records peak and plateau") {
    const ModelParams p =
        make_params(3, 1, 1.0, 0.5, 0.5, PublisherPolicy::MostDeprivedRarestBlock);
    const PopulationSweep sweep = sweep_population(p, 1, 12);
    REQUIRE(sweep.points.size() == 12);
    CHECK(sweep.peak >= sweep.plateau);
    for (std::size_t i = 0; i < sweep.points.size(); ++i)
        CHECK(sweep.points[i].peers == static_cast<int>(i + 1));
    // Throughput grows through this small-population range.
    CHECK(sweep.points[11].throughput > sweep.points[0].throughput);
}

TEST_CASE("lingering seeds reshape the departure bottleneck") {
    ModelParams p = make_params(2, 6, 1.0, 1.0, 1.0);
    const double immediate = pipeline_throughput(p, true);
    // Immediate departures leave the swarm starved of the rare block, so
    // throughput pins near the publisher capacity.
    CHECK(immediate < 1.1);

    // Moderate lingering keeps full copies around and lifts throughput
    // past the no-seed ceiling.
    p.linger_rate = 0.5;
    const double moderate = pipeline_throughput(p, true);
    CHECK(moderate > immediate);

    // Very slow seed departures throttle the exit itself: throughput is
    // capped by gamma * N.
    p.linger_rate = 0.05;
    const double slow = pipeline_throughput(p, true);
    CHECK(slow <= 0.05 * 6.0 + 1e-9);
    CHECK(slow < immediate);
}

TEST_CASE("seed donors accelerate block transfer") {
    // With seeds present, an empty peer has an extra donor with every block.
    ModelParams p = make_params(2, 3, 1.0, 1.0, 1.0);
    p.linger_rate = 0.5;
    SwarmState s(2);
    s.counts[0] = 2;
    s.seeds = 1;
    const RateContext ctx(s, p);
    // Seed serves each of blocks 1,2 to each empty peer: 2 * (1 * 1/(2*2)).
    CHECK(ctx.peer_rate(Signature::empty_set(), 1) == doctest::Approx(0.5));
    CHECK(ctx.seed_departure_rate() == doctest::Approx(0.5));
}

TEST_CASE("random-useful-peer policy wastes no donor capacity") {
    // A donor picking uniformly among peers it can help transfers faster
    // than one picking among all peers.
    ModelParams p = make_params(3, 6, 1.0, 1.0, 1.0);
    const SwarmState s = make_state(3, {{0, 3}, {0b001, 2}, {0b111 & ~0b100, 1}});
    const double random_peer = peer_rate(Signature::empty_set(), 1, s, p);
    p.peer_policy = PeerPolicy::RandomUsefulPeer;
    const double useful_peer = peer_rate(Signature::empty_set(), 1, s, p);
    CHECK(useful_peer > random_peer);
}
