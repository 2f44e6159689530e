#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ppaview {

using Rng = std::mt19937_64;

/// Seed for the named stream `name` derived from a master seed, so that adding
/// a consumer never shifts the draws of another one.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (h | 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t master, std::string_view name) { return Rng(stream_seed(master, name)); }

}  // namespace ppaview
