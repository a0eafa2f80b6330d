#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace clusterplot {

/// Stable 64-bit hash of a name (FNV-1a), used to derive per-module seeds.
constexpr std::uint64_t hash_name(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream seed from a base seed and a key tuple.
/// Order of keys matters; the result is platform independent.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = splitmix(seed);
  for (const auto k : keys) h = splitmix(h ^ splitmix(k));
  return h;
}

inline std::uint64_t module_seed(std::uint64_t seed, std::string_view module) noexcept {
  return derive_seed(seed, {hash_name(module)});
}

/// Uniform double in [0, 1) with 53 random bits, independent of the
/// standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace clusterplot
