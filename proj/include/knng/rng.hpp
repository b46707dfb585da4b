// Deterministic random helpers shared by the partitioner, the synthetic data
// generator and the theory simulators. Raw bit streams come from
// std::mt19937_64 (bit-exact across platforms); the derived draws below avoid
// std::uniform_real_distribution / std::normal_distribution, whose output is
// implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace knng {

using Rng = std::mt19937_64;

namespace rnd {

// uniform double in [0, 1)
inline double unit_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// uniform integer in [0, n), n >= 1
inline std::uint64_t below(Rng& rng, std::uint64_t n) {
    // multiply-shift with rejection of the biased tail
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t x = rng();
        auto m = static_cast<unsigned __int128>(x) * n;
        if (static_cast<std::uint64_t>(m) >= threshold)
            return static_cast<std::uint64_t>(m >> 64);
    }
}

// standard normal via Box-Muller
inline double gaussian(Rng& rng) {
    double u1 = unit_double(rng);
    while (u1 <= 0.0) u1 = unit_double(rng);
    const double u2 = unit_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// independent, reproducible substream seed for (master, index)
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

}  // namespace rnd
}  // namespace knng
