#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

namespace swarmcap {

// How the publisher picks (peer, block) at each transmission opportunity.
enum class PublisherPolicy {
    RandomPeerRandomBlock,     // rp-rub: uniform peer, uniform useful block
    RandomPeerRarestBlock,     // rp-rfb: uniform peer, least-replicated useful block
    MostDeprivedRarestBlock,   // mdp-rfb: fewest-blocks peer first, rarest block
};

// How peers pick a neighbor; the transmitted block is always a uniform
// useful one.
enum class PeerPolicy {
    RandomPeer,        // rp-rub: uniform over all other peers
    RandomUsefulPeer,  // rup-rub: uniform over peers the donor can actually help
};

const char* to_string(PublisherPolicy policy);
const char* to_string(PeerPolicy policy);
PublisherPolicy parse_publisher_policy(std::string_view text);
PeerPolicy parse_peer_policy(std::string_view text);

// Scenario definition shared by the exact chain, the queueing approximation
// and the simulator. All rates are in blocks per unit time.
struct ModelParams {
    int blocks = 3;                   // K: file fragments
    int peers = 10;                   // N: closed-system population (includes lingering seeds)
    double publisher_capacity = 1.0;  // U
    double peer_rate = 1.0;           // mu
    double endgame_rate = 1.0;        // mu': upload rate of peers one block short
    PublisherPolicy publisher_policy = PublisherPolicy::RandomPeerRandomBlock;
    PeerPolicy peer_policy = PeerPolicy::RandomPeer;
    bool shield_newcomers = false;    // tracker hides empty peers from other peers
    double linger_rate = std::numeric_limits<double>::infinity();  // gamma; inf = leave on completion

    // Finite linger rate enables the seed slot: completed peers stay and
    // serve until they depart at rate gamma each.
    bool lingering() const { return std::isfinite(linger_rate); }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

} // namespace swarmcap
