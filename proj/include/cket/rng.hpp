#pragma once

#include <cstdint>
#include <random>

namespace cket {

/// Generator used throughout. Everything random is derived from one master
/// seed through derive_seed, so results never depend on scheduling.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for (stream, index) under a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

// Stream tags.
inline constexpr std::uint64_t kLabelStream = 0x4c41424cULL;
inline constexpr std::uint64_t kPermutationStream = 0x5045524dULL;
inline constexpr std::uint64_t kDataStream = 0x44415441ULL;
inline constexpr std::uint64_t kTestStream = 0x54455354ULL;
inline constexpr std::uint64_t kTrialStream = 0x5452494cULL;

/// Uniform on the open interval (0, 1): 52 random bits on a midpoint grid,
/// so neither endpoint is reachable.
inline double uniform_open01(Rng& rng) {
  const std::uint64_t bits = rng() >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Uniform on (-1, 1).
inline double uniform_open_pm1(Rng& rng) { return 2.0 * uniform_open01(rng) - 1.0; }

}  // namespace cket
