#pragma once

#include <cstdint>

namespace lexembed {

// Independent streams derived from one user seed, so that e.g. changing the
// number of shuffles never perturbs parameter initialisation.
enum class SeedStream : std::uint64_t {
  kFilter = 1,
  kBias = 2,
  kHead = 3,
  kShuffle = 4,
  kNoisy = 5,
  kEmbeddings = 6,
  kBaseline = 7,
};

// splitmix64 finaliser over (seed, stream).
constexpr std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace lexembed
