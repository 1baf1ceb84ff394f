#include "swarmcap/params.hpp"

#include <stdexcept>

namespace swarmcap {

const char* to_string(PublisherPolicy policy) {
    switch (policy) {
        case PublisherPolicy::RandomPeerRandomBlock: return "rp-rub";
        case PublisherPolicy::RandomPeerRarestBlock: return "rp-rfb";
        case PublisherPolicy::MostDeprivedRarestBlock: return "mdp-rfb";
    }
    return "?";
}

const char* to_string(PeerPolicy policy) {
    switch (policy) {
        case PeerPolicy::RandomPeer: return "rp-rub";
        case PeerPolicy::RandomUsefulPeer: return "rup-rub";
    }
    return "?";
}

PublisherPolicy parse_publisher_policy(std::string_view text) {
    if (text == "rp-rub") return PublisherPolicy::RandomPeerRandomBlock;
    if (text == "rp-rfb") return PublisherPolicy::RandomPeerRarestBlock;
    if (text == "mdp-rfb") return PublisherPolicy::MostDeprivedRarestBlock;
    throw std::invalid_argument("unknown publisher policy '" + std::string(text) +
                                "' (expected rp-rub, rp-rfb or mdp-rfb)");
}

PeerPolicy parse_peer_policy(std::string_view text) {
    if (text == "rp-rub") return PeerPolicy::RandomPeer;
    if (text == "rup-rub") return PeerPolicy::RandomUsefulPeer;
    throw std::invalid_argument("unknown peer policy '" + std::string(text) +
                                "' (expected rp-rub or rup-rub)");
}

void ModelParams::validate() const {
    if (blocks < 1) throw std::invalid_argument("blocks: must be >= 1");
    if (blocks > 30) throw std::invalid_argument("blocks: signature mask limited to 30 blocks");
    if (peers < 1) throw std::invalid_argument("peers: must be >= 1");
    if (!(publisher_capacity > 0)) throw std::invalid_argument("publisher_capacity: must be > 0");
    if (!(peer_rate >= 0)) throw std::invalid_argument("peer_rate: must be >= 0");
    if (!(endgame_rate >= 0)) throw std::invalid_argument("endgame_rate: must be >= 0");
    if (endgame_rate > peer_rate)
        throw std::invalid_argument("endgame_rate: rate reduction only (endgame_rate <= peer_rate)");
    if (std::isnan(linger_rate) || linger_rate <= 0)
        throw std::invalid_argument("linger_rate: must be > 0 (inf = leave on completion)");
}

} // namespace swarmcap
