#pragma once

#include <cstdint>
#include <random>

namespace sem {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Child seed for a work item, so per-example randomness does not depend on
// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::splitmix64(seed ^ detail::splitmix64(index + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace sem
