#pragma once

#include <bit>
#include <cstdint>
#include <string>

namespace swarmcap {

// The set of blocks a peer currently holds, encoded as a K-bit mask with
// block j mapped to bit j-1. Block indices are 1-based throughout the API.
// The full set (all K blocks) is a valid mask value but never a stored peer
// signature: a peer that completes the file departs immediately.
struct Signature {
    std::uint32_t mask = 0;

    constexpr Signature() = default;
    explicit constexpr Signature(std::uint32_t m) : mask(m) {}

    static constexpr Signature empty_set() { return Signature{0}; }
    static constexpr Signature full_set(int blocks) {
        return Signature{(std::uint32_t{1} << blocks) - 1};
    }
    static constexpr Signature all_but(int blocks, int block) {
        return Signature{full_set(blocks).mask & ~(std::uint32_t{1} << (block - 1))};
    }

    constexpr bool contains(int block) const { return (mask >> (block - 1)) & 1u; }
    constexpr bool empty() const { return mask == 0; }
    constexpr int size() const { return std::popcount(mask); }

    constexpr Signature with(int block) const {
        return Signature{mask | (std::uint32_t{1} << (block - 1))};
    }
    constexpr Signature without(int block) const {
        return Signature{mask & ~(std::uint32_t{1} << (block - 1))};
    }
    // Set difference: blocks held by *this that `other` lacks.
    constexpr Signature minus(Signature other) const { return Signature{mask & ~other.mask}; }

    constexpr auto operator<=>(const Signature&) const = default;
};

// "{1,3}" rendering for diagnostics and logs.
std::string to_string(Signature sig, int blocks);

} // namespace swarmcap
