#pragma once

#include <cstdint>
#include <random>

namespace bargainlab {

// splitmix64 mixer; used to turn (seed, stream index) pairs into engine
// seeds so each bootstrap replication / simulated household owns an
// independent, scheduling-invariant stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

} // namespace bargainlab
