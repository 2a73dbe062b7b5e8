#pragma once

// Seeded randomness with results that do not depend on the standard library
// implementation: std::mt19937_64 is fully specified, the distributions on
// top of it are not, so index draws and shuffles are done here.

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace maskseq {

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

/// Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-item seed: independent of processing order and worker count.
inline std::uint64_t item_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = fnv1a64(key) ^ (seed + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  // splitmix64 finalizer
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace maskseq
