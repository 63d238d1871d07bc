#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace deal {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed mixing rule: fold each component into the running state with
// splitmix64(state ^ component). Order matters; the result depends only on
// the components, never on scheduling.
template <typename... Parts>
constexpr std::uint64_t mix_seed(std::uint64_t master, Parts... parts) noexcept {
  std::uint64_t state = splitmix64(master);
  ((state = splitmix64(state ^ static_cast<std::uint64_t>(parts))), ...);
  return state;
}

// Uniform integer in [0, n) by rejection on the raw 64-bit engine output.
// Avoids std::uniform_int_distribution, whose algorithm is unspecified.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  // 2^64 mod range; draws below it would bias the low residues.
  const std::uint64_t threshold = (0 - range) % range;
  std::uint64_t draw = rng();
  while (draw < threshold) draw = rng();
  return static_cast<std::size_t>(draw % range);
}

// First k elements of a uniformly shuffled copy of `items` (partial Fisher-Yates).
template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> items, std::size_t k,
                                          Rng& rng) {
  std::vector<T> pool(items.begin(), items.end());
  if (k > pool.size()) k = pool.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace deal
