#pragma once
// Counter-based random numbers for the path simulator: Philox4x32-10 blocks
// keyed on the user seed, consumed through a Box-Muller transform. Stateless
// by construction — the normal increment for (path p, step k) depends only on
// (seed, p, k) — so any execution order reproduces the same stream.

#include <array>
#include <cstdint>

namespace msfde::detail {

// One Philox4x32-10 block: 10 rounds of the multiply-hi/lo bijection with
// the Weyl key schedule (constants from the original publication).
inline std::array<std::uint32_t, 4> philox4x32(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

// Standard normal from one block: the two 64-bit words feed Box-Muller
// (cosine branch). u1 is shifted into (0, 1] so the logarithm never sees 0.
double philox_normal(std::uint64_t seed, std::uint64_t path,
                     std::uint32_t step, std::uint32_t stream);

// Stream tags: Brownian increments use stream 0, the random initial-segment
// amplitude uses the reserved tag below (with step 0).
inline constexpr std::uint32_t kBrownianStream = 0u;
inline constexpr std::uint32_t kAmplitudeStream = 0xFFFFFFFFu;

} // namespace msfde::detail
