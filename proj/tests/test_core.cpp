#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "swarmcap/enumeration.hpp"
#include "swarmcap/errors.hpp"
#include "swarmcap/state.hpp"

using namespace swarmcap;

namespace {

// C(n, k) the slow way; independent of the enumeration code.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

SwarmState make_state(int blocks, const std::map<std::uint32_t, std::uint32_t>& counts) {
    SwarmState s(blocks);
    for (const auto& [mask, n] : counts) s.counts[mask] = n;
    return s;
}

SwarmState random_state(int blocks, std::uint32_t peers, std::mt19937_64& eng) {
    SwarmState s(blocks);
    std::uniform_int_distribution<std::uint32_t> slot(0, static_cast<std::uint32_t>(s.counts.size() - 1));
    for (std::uint32_t p = 0; p < peers; ++p) s.counts[slot(eng)]++;
    return s;
}

std::multiset<std::uint32_t> replica_multiset(const SwarmState& s) {
    const ReplicaProfile profile = replica_profile(s);
    return {profile.replicas.begin(), profile.replicas.end()};
}

std::multiset<int> cardinality_multiset(const SwarmState& s) {
    std::multiset<int> cards;
    for (std::uint32_t mask = 0; mask < s.counts.size(); ++mask)
        for (std::uint32_t i = 0; i < s.counts[mask]; ++i)
            cards.insert(Signature{mask}.size());
    return cards;
}

} // namespace

TEST_CASE("signature mask basics") {
    const Signature s = Signature::empty_set().with(1).with(3);
    CHECK(s.mask == 0b101);
    CHECK(s.contains(1));
    CHECK(!s.contains(2));
    CHECK(s.size() == 2);
    CHECK(Signature::full_set(3).mask == 0b111);
    CHECK(Signature::all_but(3, 2).mask == 0b101);
    CHECK(Signature{0b110}.minus(Signature{0b010}).mask == 0b100);
    CHECK(to_string(s, 3) == "{1,3}");
}

TEST_CASE("state count reproduces the composition formula") {
    ModelParams p;
    p.blocks = 3;
    p.peers = 5;
    CHECK(enumerate_states(p).size() == 462);

    p.blocks = 2;
    p.peers = 3;
    CHECK(enumerate_states(p).size() == binomial(5, 3));  // 10

    p.blocks = 1;
    p.peers = 4;
    const auto states = enumerate_states(p);
    REQUIRE(states.size() == 1);
    CHECK(states[0].counts[0] == 4);
}

TEST_CASE("enumeration respects the cap") {
    ModelParams p;
    p.blocks = 3;
    p.peers = 5;
    EnumerationOptions options;
    options.max_states = 461;
    CHECK_THROWS_AS(enumerate_states(p, options), EnumerationLimitExceeded);
    options.max_states = 462;
    CHECK(enumerate_states(p, options).size() == 462);
}

TEST_CASE("enumeration conserves the population and stays deterministic") {
    ModelParams p;
    p.blocks = 3;
    p.peers = 6;
    const auto first = enumerate_states(p);
    const auto second = enumerate_states(p);
    CHECK(first == second);
    for (const SwarmState& s : first) CHECK(s.population() == 6);
}

TEST_CASE("enumeration includes the seed slot when lingering") {
    ModelParams p;
    p.blocks = 2;
    p.peers = 3;
    p.linger_rate = 1.0;
    // 4 slots now: compositions of 3 over 4 slots.
    const auto states = enumerate_states(p);
    CHECK(states.size() == binomial(6, 3));
    bool saw_seeds = false;
    for (const SwarmState& s : states) {
        CHECK(s.population() == 3);
        saw_seeds = saw_seeds || s.seeds > 0;
    }
    CHECK(saw_seeds);
}

TEST_CASE("replica profile counts holders per block") {
    CHECK(replica_profile(make_state(3, {{0b011, 4}})).replicas ==
          std::vector<std::uint32_t>{4, 4, 0});
    CHECK(replica_profile(make_state(3, {{0, 7}})).replicas ==
          std::vector<std::uint32_t>{0, 0, 0});
    CHECK(replica_profile(make_state(3, {{0b010, 3}, {0b101, 1}})).replicas ==
          std::vector<std::uint32_t>{1, 3, 1});
}

TEST_CASE("lumping relabels blocks by ascending replica count") {
    // replicas (1,3,1): block order 1,3,2, so 1->1, 3->2, 2->3.
    const SwarmState lumped = lump_state(make_state(3, {{0b010, 3}, {0b101, 1}}));
    CHECK(lumped == make_state(3, {{0b100, 3}, {0b011, 1}}));
}

TEST_CASE("lumping is the identity when all replica counts tie") {
    const SwarmState s = make_state(3, {{0b011, 1}, {0b100, 1}});  // replicas (1,1,1)
    CHECK(lump_state(s) == s);
    const SwarmState empty = make_state(3, {{0, 9}});
    CHECK(lump_state(empty) == empty);
}

TEST_CASE("lumping is idempotent and preserves the invariant multisets") {
    std::mt19937_64 eng(20240901);
    for (int trial = 0; trial < 1000; ++trial) {
        const SwarmState s = random_state(3, 10, eng);
        const SwarmState lumped = lump_state(s);
        CHECK(lump_state(lumped) == lumped);
        CHECK(lumped.population() == s.population());
        CHECK(replica_multiset(lumped) == replica_multiset(s));
        CHECK(cardinality_multiset(lumped) == cardinality_multiset(s));

        // Canonical form: replica counts non-decreasing in block index.
        const ReplicaProfile profile = replica_profile(lumped);
        CHECK(std::is_sorted(profile.replicas.begin(), profile.replicas.end()));
    }
}

TEST_CASE("lumped state counts match the reference table") {
    ModelParams p;
    p.blocks = 3;
    p.peers = 5;
    CHECK(enumerate_lumped_states(p).size() == 127);
    p.peers = 20;
    CHECK(enumerate_lumped_states(p).size() == 46163);
    p.blocks = 1;
    p.peers = 12;
    CHECK(enumerate_lumped_states(p).size() == 1);
}

TEST_CASE("lumped enumeration is a strict reduction for K >= 2") {
    ModelParams p;
    for (int blocks = 1; blocks <= 3; ++blocks) {
        p.blocks = blocks;
        p.peers = 5;
        const auto full = enumerate_states(p);
        const auto lumped = enumerate_lumped_states(p);
        if (blocks == 1)
            CHECK(lumped.size() == full.size());
        else
            CHECK(lumped.size() < full.size());

        // The lumped list is exactly the distinct canonical images.
        std::set<std::vector<std::uint32_t>> canonical;
        for (const SwarmState& s : full) canonical.insert(lump_state(s).counts);
        CHECK(canonical.size() == lumped.size());
        for (const SwarmState& s : lumped) CHECK(canonical.count(s.counts) == 1);
    }
}

TEST_CASE("model params validation names the offending field") {
    ModelParams p;
    p.blocks = 0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("blocks"), std::invalid_argument);
    p.blocks = 3;
    p.endgame_rate = 2.0;
    p.peer_rate = 1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("endgame_rate"), std::invalid_argument);
    p.endgame_rate = 0.5;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("policy names round-trip") {
    for (PublisherPolicy policy :
         {PublisherPolicy::RandomPeerRandomBlock, PublisherPolicy::RandomPeerRarestBlock,
          PublisherPolicy::MostDeprivedRarestBlock})
        CHECK(parse_publisher_policy(to_string(policy)) == policy);
    for (PeerPolicy policy : {PeerPolicy::RandomPeer, PeerPolicy::RandomUsefulPeer})
        CHECK(parse_peer_policy(to_string(policy)) == policy);
    CHECK_THROWS_AS(parse_publisher_policy("bogus"), std::invalid_argument);
}
