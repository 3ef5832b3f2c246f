#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rrm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named deterministic stream: the same (master, name, index) always yields the same sequence.
inline Rng make_stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
    return Rng(mix64(mix64(master ^ fnv1a(name)) + index));
}

}  // namespace rrm
