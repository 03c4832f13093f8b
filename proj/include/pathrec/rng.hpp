#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace pathrec {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits.
inline double rand_u01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n); n must be positive.
inline std::uint64_t rand_below(Rng& rng, std::uint64_t n) {
    std::uint64_t x, r;
    do {
        x = rng();
        r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
}

inline double rand_uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_u01(rng);
}

// Fisher-Yates; avoids std::shuffle so sequences do not depend on the stdlib.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[static_cast<std::size_t>(rand_below(rng, i))]);
    }
}

} // namespace pathrec
