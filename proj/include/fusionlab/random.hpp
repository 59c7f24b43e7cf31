#pragma once

#include <cstdint>
#include <random>

namespace fusionlab {

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (base, stream) pairs.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace fusionlab
