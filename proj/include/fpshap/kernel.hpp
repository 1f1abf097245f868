#pragma once

#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/errors.hpp"

namespace fpshap {

// Weight pinning the empty and grand coalitions in the least-squares system.
// Large enough to act as a soft equality constraint, small enough to keep the
// normal equations well inside the conditioning limit.
inline constexpr double kDefaultAnchorWeight = 1e6;

// Shapley kernel weight for a coalition of size s out of p features:
//   k(p, s) = (p - 1) / (C(p, s) * s * (p - s))        for 0 < s < p,
// and the anchor weight at the extremes.
inline double kernel_weight(int p, int s,
                            double anchor_weight = kDefaultAnchorWeight) {
  if (p < 2) throw ArgumentError("kernel_weight: need at least 2 features");
  if (s < 0 || s > p) throw ArgumentError("kernel_weight: size out of range");
  if (anchor_weight <= 0) {
    throw ArgumentError("kernel_weight: anchor weight must be positive");
  }
  if (s == 0 || s == p) return anchor_weight;
  const double choose = static_cast<double>(binomial(p, s));
  return static_cast<double>(p - 1) /
         (choose * static_cast<double>(s) * static_cast<double>(p - s));
}

// Kernel weights for every coalition size, indexed by size.
struct KernelWeightTable {
  int p = 0;
  double anchor_weight = kDefaultAnchorWeight;
  std::vector<double> w;  // size p + 1

  double at(int size) const { return w.at(static_cast<std::size_t>(size)); }
};

inline KernelWeightTable make_kernel_table(
    int p, double anchor_weight = kDefaultAnchorWeight) {
  KernelWeightTable table;
  table.p = p;
  table.anchor_weight = anchor_weight;
  table.w.resize(static_cast<std::size_t>(p) + 1);
  for (int s = 0; s <= p; ++s) {
    table.w[static_cast<std::size_t>(s)] = kernel_weight(p, s, anchor_weight);
  }
  return table;
}

}  // namespace fpshap
