#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/errors.hpp"
#include "fpshap/quadrature.hpp"

// Wallenius' noncentral hypergeometric distribution: group counts under
// sequential weighted draws without replacement. The sampler only needs its
// mean (to allocate the coalition budget across strata); the pmf is kept for
// verification.

namespace fpshap {

// c groups with m_i items each, per-item weight omega_i, n total draws.
struct UrnSpec {
  std::vector<std::int64_t> items;    // m
  std::vector<double> weights;        // omega
  std::int64_t draws = 0;             // n

  std::size_t groups() const { return items.size(); }
  std::int64_t total_items() const {
    return std::accumulate(items.begin(), items.end(), std::int64_t{0});
  }

  void validate() const {
    if (items.empty() || items.size() != weights.size()) {
      throw ArgumentError("UrnSpec: need matching, nonempty m and omega");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i] < 1) throw ArgumentError("UrnSpec: every m_i must be >= 1");
      if (!(weights[i] > 0.0)) {
        throw ArgumentError("UrnSpec: every omega_i must be positive");
      }
    }
    if (draws < 0 || draws > total_items()) {
      throw ArgumentError("UrnSpec: draws outside [0, sum m_i]");
    }
  }
};

// p(x; m, n, omega) = (prod C(m_i, x_i)) * I, with
//   I = \int_0^1 prod (1 - t^{omega_i / d})^{x_i} dt,
//   d = sum omega_i (m_i - x_i).
inline double wallenius_pmf(const std::vector<std::int64_t>& x,
                            const UrnSpec& urn, double abs_tol = 1e-10) {
  urn.validate();
  if (x.size() != urn.groups()) {
    throw ArgumentError("wallenius_pmf: x has wrong number of groups");
  }
  std::int64_t total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || x[i] > urn.items[i]) {
      throw ArgumentError("wallenius_pmf: x_i outside [0, m_i]");
    }
    total += x[i];
  }
  if (total != urn.draws) {
    throw ArgumentError("wallenius_pmf: sum x_i != draws");
  }
  if (urn.draws == 0) return 1.0;

  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d += urn.weights[i] * static_cast<double>(urn.items[i] - x[i]);
  }
  if (d == 0.0) {
    // All groups exhausted; only consistent with drawing the whole urn.
    if (urn.draws == urn.total_items()) return 1.0;
    throw ArgumentError("wallenius_pmf: degenerate urn (d = 0 with n < sum m)");
  }

  double choose = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    choose *= static_cast<double>(
        binomial(static_cast<int>(urn.items[i]), static_cast<int>(x[i])));
  }

  std::vector<double> exponents;  // omega_i / d for groups with x_i > 0
  std::vector<double> powers;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0) {
      exponents.push_back(urn.weights[i] / d);
      powers.push_back(static_cast<double>(x[i]));
    }
  }
  const double integral = detail::integrate_adaptive(
      [&](double t) {
        double prod = 1.0;
        for (std::size_t i = 0; i < exponents.size(); ++i) {
          prod *= std::pow(1.0 - std::pow(t, exponents[i]), powers[i]);
        }
        return prod;
      },
      0.0, 1.0, abs_tol);
  return choose * integral;
}

// Expected draws per group, via the standard fixed point: find theta in
// (0, 1) with sum m_i (1 - theta^{omega_i}) = n, then
// mu_i = m_i (1 - theta^{omega_i}). Solved by bisection in log(theta), which
// stays accurate when theta underflows toward 0 for strongly skewed weights.
inline std::vector<double> wallenius_mean(const UrnSpec& urn) {
  urn.validate();
  const std::size_t c = urn.groups();
  std::vector<double> mu(c, 0.0);
  if (urn.draws == 0) return mu;
  if (urn.draws == urn.total_items()) {
    for (std::size_t i = 0; i < c; ++i) {
      mu[i] = static_cast<double>(urn.items[i]);
    }
    return mu;
  }

  const double n = static_cast<double>(urn.draws);
  const auto residual = [&](double u) {  // u = log(theta) < 0
    double s = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      s += static_cast<double>(urn.items[i]) *
           (1.0 - std::exp(urn.weights[i] * u));
    }
    return s - n;
  };

  // residual is strictly decreasing in u, negative at u = 0, positive for
  // u negative enough.
  double hi = 0.0;
  double lo = -1.0;
  while (residual(lo) <= 0.0) {
    lo *= 2.0;
    if (lo < -1e12) {
      throw ArgumentError("wallenius_mean: failed to bracket the fixed point");
    }
  }
  double mid = lo;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // interval below double resolution
    const double r = residual(mid);
    if (std::abs(r) <= 1e-12) break;
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  for (std::size_t i = 0; i < c; ++i) {
    const double raw = static_cast<double>(urn.items[i]) *
                       (1.0 - std::exp(urn.weights[i] * mid));
    mu[i] = std::clamp(raw, 0.0, static_cast<double>(urn.items[i]));
  }
  return mu;
}

enum class RoundingMode {
  // Round the expected counts and repair the total with the largest-remainder
  // rule, so the coalition budget is hit exactly.
  kLargestRemainder,
  // Plain round-to-nearest; the total may drift off n.
  kNearest,
};

struct Allocation {
  std::vector<double> mu;        // expected draws
  std::vector<std::int64_t> x;   // integer draws
};

namespace detail {

inline std::vector<std::int64_t> round_counts(
    const std::vector<double>& mu, const std::vector<std::int64_t>& caps,
    std::int64_t target, RoundingMode mode) {
  const std::size_t c = mu.size();
  std::vector<std::int64_t> x(c);
  if (mode == RoundingMode::kNearest) {
    for (std::size_t i = 0; i < c; ++i) {
      x[i] = std::min<std::int64_t>(caps[i], std::llround(mu[i]));
    }
    return x;
  }

  std::int64_t used = 0;
  std::vector<std::pair<double, std::size_t>> remainders;  // (-frac, index)
  for (std::size_t i = 0; i < c; ++i) {
    x[i] = std::min(caps[i], static_cast<std::int64_t>(std::floor(mu[i])));
    used += x[i];
    remainders.emplace_back(-(mu[i] - static_cast<double>(x[i])), i);
  }
  // Ties broken by group index so the result is deterministic.
  std::sort(remainders.begin(), remainders.end());
  std::int64_t leftover = target - used;
  for (const auto& [neg_frac, i] : remainders) {
    if (leftover <= 0) break;
    if (neg_frac < 0.0 && x[i] < caps[i]) {
      ++x[i];
      --leftover;
    }
  }
  // Floating-point slop can leave a unit unplaced; park it in any open group.
  for (std::size_t i = 0; i < c && leftover > 0; ++i) {
    const auto room = caps[i] - x[i];
    const auto add = std::min<std::int64_t>(room, leftover);
    x[i] += add;
    leftover -= add;
  }
  return x;
}

}  // namespace detail

// Expected Wallenius counts rounded to integers summing (in the default mode)
// exactly to the number of draws.
inline Allocation allocate_integer(
    const UrnSpec& urn, RoundingMode mode = RoundingMode::kLargestRemainder) {
  Allocation out;
  out.mu = wallenius_mean(urn);
  out.x = detail::round_counts(out.mu, urn.items, urn.draws, mode);
  return out;
}

}  // namespace fpshap
