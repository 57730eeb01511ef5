#pragma once

#include <cmath>
#include <cstdint>

#include "cflab/group.hpp"

namespace cflab {

/// Counter-based randomness: every draw is a pure function of
/// (seed, key, counter), so results are identical under any iteration order
/// or thread schedule.  The mixer is the splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_word(std::uint64_t seed, std::uint64_t key,
                                 std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ key) + counter);
}

/// Uniform in [0, 1) with 53 random mantissa bits.
inline double stream_uniform(std::uint64_t seed, std::uint64_t key,
                             std::uint64_t counter) {
  return double(stream_word(seed, key, counter) >> 11) * 0x1.0p-53;
}

/// FNV-1a over the canonical coordinates: a stable per-element key, the
/// same for equal elements no matter how they were produced.
inline std::uint64_t element_key(const GroupElement& g) {
  std::uint64_t h = 14695981039346656037ull;
  auto absorb = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  absorb(static_cast<std::uint64_t>(g.kind));
  for (std::int64_t c : g.coords) absorb(static_cast<std::uint64_t>(c));
  return h;
}

/// Key for one cylinder (level, name) in one role, so distinct uses of the
/// same cylinder (count draw vs. refinement split) see independent streams.
inline std::uint64_t cylinder_key(int level, const GroupElement& name,
                                  std::uint64_t role = 0) {
  return mix64(element_key(name) ^
               (std::uint64_t(std::uint32_t(level)) | (role << 32)));
}

/// Smallest k with P(Poisson(t) <= k) > u, by forward CDF walk.  The pmf
/// underflow guard stops the walk once no further term can move the CDF.
inline std::int64_t poisson_inverse(double t, double u) {
  double p = std::exp(-t);
  double cum = p;
  std::int64_t k = 0;
  while (cum <= u) {
    ++k;
    p *= t / double(k);
    cum += p;
    if (p < 1e-300) break;
  }
  return k;
}

}  // namespace cflab
