#ifndef OCEANPROV_DETAIL_RANDOM_HPP
#define OCEANPROV_DETAIL_RANDOM_HPP

#include <cstdint>
#include <random>

namespace oceanprov::detail {

// std::uniform_*_distribution is implementation-defined; these helpers keep
// every sampled stream identical across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

// Marsaglia polar method; consumes a deterministic number of draws per pair.
inline double gaussian(std::mt19937_64& rng) {
    while (true) {
        const double u = 2.0 * uniform_unit(rng) - 1.0;
        const double v = 2.0 * uniform_unit(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
    }
}

}

#endif
