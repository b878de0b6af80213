#pragma once

// Seed derivation for reproducible substreams.  Every stochastic entry point
// takes an explicit 64-bit seed; workers and purposes get decorrelated
// substreams via splitmix64 so results depend only on (seed, worker count).

#include <cstdint>
#include <random>

namespace qfsk {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable stream id for (seed, lane, purpose).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane,
                                 std::uint64_t purpose = 0) {
    std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ splitmix64(lane + 1));
    h = splitmix64(h ^ splitmix64(purpose + 0x9e3779b97f4a7c15ULL));
    return h;
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t lane,
                                   std::uint64_t purpose = 0) {
    return std::mt19937_64(derive_seed(master, lane, purpose));
}

}  // namespace qfsk
