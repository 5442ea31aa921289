#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace groupsift::util {

/// Hex-encoded SHA-256 of `data` (64 lowercase hex chars). Backed by libcrypto.
std::string sha256_hex(std::string_view data);

/// FNV-1a, 64-bit. Stable across platforms; used as the base hash for shingles
/// and feature hashing. Not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// splitmix64 finalizer; bijective on 64-bit words. Used to derive independent
/// hash functions and per-tree RNG seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Convenience: FNV base hash mixed once (better avalanche for short strings).
inline std::uint64_t stable_hash64(std::string_view s) {
    return splitmix64(fnv1a64(s));
}

} // namespace groupsift::util
