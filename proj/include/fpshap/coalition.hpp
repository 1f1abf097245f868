#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "fpshap/errors.hpp"

namespace fpshap {

// Full enumeration (2^p rows) is only used for ground-truth solves; above
// this it is deliberately refused instead of silently melting the machine.
inline constexpr int kMaxEnumerationFeatures = 25;
// Masks are 32-bit; sampling-based paths work up to this many features.
inline constexpr int kMaxFeatures = 32;

namespace detail {

inline constexpr int kBinomialMax = 62;  // C(62,31) still fits in uint64_t

// Pascal's triangle, exact in 64-bit.
inline const std::array<std::array<std::uint64_t, kBinomialMax + 1>,
                        kBinomialMax + 1>&
binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kBinomialMax + 1>, kBinomialMax + 1>
        t{};
    for (int n = 0; n <= kBinomialMax; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) {
        t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > detail::kBinomialMax) {
    throw ArgumentError("binomial: n out of range");
  }
  if (k < 0 || k > n) return 0;
  return detail::binomial_table()[static_cast<std::size_t>(n)]
                                 [static_cast<std::size_t>(k)];
}

// A subset of the p features; bit j set means feature j is in the coalition.
class CoalitionMask {
 public:
  CoalitionMask() = default;

  CoalitionMask(std::uint32_t bits, int feature_count)
      : bits_(bits), p_(feature_count) {
    if (feature_count < 1 || feature_count > kMaxFeatures) {
      throw ArgumentError("CoalitionMask: feature count out of range");
    }
    if (feature_count < kMaxFeatures &&
        bits >> static_cast<unsigned>(feature_count)) {
      throw ArgumentError("CoalitionMask: bits outside feature range");
    }
  }

  static CoalitionMask empty(int feature_count) {
    return CoalitionMask(0, feature_count);
  }
  static CoalitionMask grand(int feature_count) {
    CoalitionMask m(0, feature_count);
    m.bits_ = feature_count == kMaxFeatures
                  ? ~std::uint32_t{0}
                  : ((std::uint32_t{1} << feature_count) - 1);
    return m;
  }

  std::uint32_t bits() const noexcept { return bits_; }
  int feature_count() const noexcept { return p_; }
  int size() const noexcept { return std::popcount(bits_); }
  bool contains(int feature) const noexcept {
    return (bits_ >> static_cast<unsigned>(feature)) & 1u;
  }
  bool is_empty() const noexcept { return bits_ == 0; }
  bool is_grand() const noexcept { return size() == p_; }

  CoalitionMask complement() const {
    CoalitionMask out = *this;
    out.bits_ = grand(p_).bits_ & ~bits_;
    return out;
  }

  friend bool operator==(const CoalitionMask&, const CoalitionMask&) = default;

  std::string to_string() const {
    std::string s;
    for (int j = 0; j < p_; ++j) s.push_back(contains(j) ? '1' : '0');
    return s;
  }

 private:
  std::uint32_t bits_ = 0;
  int p_ = 1;
};

// All 2^p coalitions in ascending bit-pattern order.
inline std::vector<CoalitionMask> enumerate_coalitions(int feature_count) {
  if (feature_count < 2) {
    throw ArgumentError("enumerate_coalitions: need at least 2 features");
  }
  if (feature_count > kMaxEnumerationFeatures) {
    throw CapacityError("enumerate_coalitions: feature count " +
                        std::to_string(feature_count) + " exceeds cap of " +
                        std::to_string(kMaxEnumerationFeatures));
  }
  const std::uint64_t total = std::uint64_t{1} << feature_count;
  std::vector<CoalitionMask> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    out.emplace_back(static_cast<std::uint32_t>(bits), feature_count);
  }
  return out;
}

// rank -> k-subset of {0..n-1} in lexicographic order (smallest feature index
// decided first). Inverse of the combinatorial number system; lets us draw
// uniform coalitions from a stratum without materialising it.
inline std::uint32_t unrank_subset(std::uint64_t rank, int n, int k) {
  if (n < 0 || n > kMaxFeatures || k < 0 || k > n) {
    throw ArgumentError("unrank_subset: bad subset shape");
  }
  if (rank >= binomial(n, k)) {
    throw ArgumentError("unrank_subset: rank out of range");
  }
  std::uint32_t bits = 0;
  int remaining = k;
  for (int f = 0; f < n && remaining > 0; ++f) {
    const std::uint64_t with_f = binomial(n - 1 - f, remaining - 1);
    if (rank < with_f) {
      bits |= std::uint32_t{1} << static_cast<unsigned>(f);
      --remaining;
    } else {
      rank -= with_f;
    }
  }
  return bits;
}

}  // namespace fpshap
