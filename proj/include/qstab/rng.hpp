#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qstab {

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Engine for the substream identified by (seed, label, index). Every random
/// draw in the library goes through here so stages can be rerun independently
/// and results never depend on call order across runs.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  const std::uint64_t tag = fnv1a(label);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform draw in [lo, hi) built from raw engine bits, so the value is the
/// same across standard library implementations.
inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Standard normal via Box-Muller on `uniform`.
inline double standard_normal(std::mt19937_64& eng) {
  double u1 = uniform(eng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform(eng, 0.0, 1.0);
  const double u2 = uniform(eng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace qstab
