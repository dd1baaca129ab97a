#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "isp/error.hpp"

// Seeded randomness helpers. All sampling is built directly on the
// mt19937_64 output stream; std::*_distribution is avoided because its
// output is implementation-defined and reports must be reproducible
// across standard libraries.

namespace isp::rng {

using Engine = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL));
}

inline Engine make(std::uint64_t seed) { return Engine(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). Requires n >= 1.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::internal, "uniform_index: empty range");
  return static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n)) % n;
}

/// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(Engine& eng,
                                                           std::size_t n,
                                                           std::size_t k) {
  if (k > n) throw Error(ErrorKind::invalid_size, "sample larger than population");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(eng, n - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

/// Index drawn proportionally to non-negative weights. Zero total weight
/// falls back to index 0.
inline std::size_t weighted_pick(Engine& eng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return 0;
  double r = uniform01(eng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace isp::rng
