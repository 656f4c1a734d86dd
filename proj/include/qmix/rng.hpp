#pragma once

#include <cstdint>
#include <random>

namespace qmix {

using RandomStream = std::mt19937_64;

/// SplitMix64 finaliser over (master, index); distinct indices give decorrelated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent substream `index` of the master seed.
inline RandomStream make_stream(std::uint64_t master, std::uint64_t index) {
  return RandomStream(derive_seed(master, index));
}

}  // namespace qmix
