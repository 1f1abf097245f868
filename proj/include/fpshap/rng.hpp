#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_set>
#include <vector>

#include "fpshap/errors.hpp"

// Self-contained pseudo-random machinery. The standard library's
// distributions and std::shuffle are implementation-defined, which would make
// sampled results differ across toolchains; everything here is pinned to a
// fixed algorithm so a (config, seed) pair reproduces byte-identical output
// anywhere.

namespace fpshap {

namespace detail {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Good avalanche; also used
// to derive independent child seeds.
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

// Counter-based seed derivation: children of one master seed are
// independent streams, so runs / replicates can be generated in any order
// (or concurrently) without collisions.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0,
                                           std::uint64_t c = 0) noexcept {
  std::uint64_t h = detail::splitmix64_mix(seed + detail::kGolden);
  h = detail::splitmix64_mix(h ^ (a + detail::kGolden));
  h = detail::splitmix64_mix(h ^ (b + detail::kGolden));
  h = detail::splitmix64_mix(h ^ (c + detail::kGolden));
  return h;
}

// splitmix64 generator. Small state, passes the usual batteries, and every
// operation below is written against it explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += detail::kGolden;
    return detail::splitmix64_mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling keeps it exactly unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Rng::below requires n > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller. One variate per call; the second branch
  // is discarded to keep the stream position a simple function of call count.
  double normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

// Uniform k-subset of {0, ..., population-1} via Floyd's algorithm, returned
// sorted ascending. O(k) draws regardless of population size.
inline std::vector<std::uint64_t> sample_without_replacement(
    std::uint64_t population, std::uint64_t count, Rng& rng) {
  if (count > population) {
    throw ArgumentError("sample_without_replacement: count exceeds population");
  }
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Stream tags for derive_seed; one per independent consumer of randomness.
namespace seed_stream {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kRunSample = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kReplicate = 4;
inline constexpr std::uint64_t kBaseline = 5;
inline constexpr std::uint64_t kBeta = 6;
}  // namespace seed_stream

}  // namespace fpshap
