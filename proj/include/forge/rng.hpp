#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "forge/hash.hpp"

namespace forge {

// SplitMix64. std::uniform_int_distribution is implementation-defined, so
// every sampling decision that must reproduce byte-identically across
// platforms goes through this generator instead.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) by rejection; bound > 0.
    uint64_t next_below(uint64_t bound) {
        const uint64_t threshold = -bound % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (no cached spare; call cost is fine here).
    double next_gaussian();

private:
    uint64_t state_;
};

inline double SplitMix64::next_gaussian() {
    // Avoid log(0).
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Derives an independent substream for a keyed record so that parallel
// processing order cannot perturb any sampling decision.
inline SplitMix64 substream(uint64_t root_seed, std::string_view key) {
    uint64_t h = fnv1a64_bytes(&root_seed, sizeof(root_seed));
    h = fnv1a64(key, h);
    return SplitMix64(h);
}

// Samples k distinct indices from [0, n) without replacement
// (partial Fisher-Yates); k <= n.
inline std::vector<size_t> sample_without_replacement(SplitMix64& rng, size_t n, size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rng.next_below(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace forge
