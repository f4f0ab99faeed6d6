#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

// FNV-1a, 64-bit. Used for config hashes, index checksums, and RNG
// substream derivation; stable across platforms.
inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a64_bytes(const void* data, size_t len, uint64_t seed = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = kFnvOffset) {
    return fnv1a64_bytes(s.data(), s.size(), seed);
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace forge
