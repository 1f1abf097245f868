#pragma once

// Test-only reference implementations, kept deliberately independent of the
// library code paths they check.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/oracle.hpp"
#include "fpshap/rng.hpp"
#include "fpshap/wallenius.hpp"

namespace fpshap::test {

inline LinearMarginalOracle random_linear_oracle(int p, Rng& rng) {
  Eigen::VectorXd beta(p);
  Eigen::VectorXd means(p);
  for (int j = 0; j < p; ++j) {
    beta(j) = 2.0 * rng.normal();
    means(j) = rng.normal();
  }
  return LinearMarginalOracle(rng.normal(), beta, means);
}

inline Eigen::VectorXd random_point(int p, Rng& rng) {
  Eigen::VectorXd x(p);
  for (int j = 0; j < p; ++j) x(j) = rng.normal();
  return x;
}

// Arbitrary game for solver tests; ignores x_star.
class FunctionOracle final : public ContributionOracle {
 public:
  FunctionOracle(int p, std::function<double(const CoalitionMask&)> value)
      : p_(p), value_(std::move(value)) {}

  int feature_count() const override { return p_; }
  double contribution(const CoalitionMask& coalition,
                      const Eigen::VectorXd&) const override {
    return value_(coalition);
  }
  double value_empty() const override {
    return value_(CoalitionMask::empty(p_));
  }
  double predict(const Eigen::VectorXd&) const override {
    return value_(CoalitionMask::grand(p_));
  }

 private:
  int p_;
  std::function<double(const CoalitionMask&)> value_;
};

// Exact distribution of group counts under sequential weighted draws without
// replacement, by forward dynamic programming over remaining-item states.
// This is the from-first-principles oracle for both the Wallenius pmf formula
// and its mean.
inline std::map<std::vector<std::int64_t>, double> wallenius_exact_distribution(
    const UrnSpec& urn) {
  urn.validate();
  std::map<std::vector<std::int64_t>, double> frontier;
  frontier[urn.items] = 1.0;  // remaining counts
  for (std::int64_t step = 0; step < urn.draws; ++step) {
    std::map<std::vector<std::int64_t>, double> next;
    for (const auto& [remaining, prob] : frontier) {
      double total_weight = 0.0;
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        total_weight += urn.weights[i] * static_cast<double>(remaining[i]);
      }
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (remaining[i] == 0) continue;
        const double p_i =
            urn.weights[i] * static_cast<double>(remaining[i]) / total_weight;
        std::vector<std::int64_t> child = remaining;
        --child[i];
        next[child] += prob * p_i;
      }
    }
    frontier = std::move(next);
  }
  std::map<std::vector<std::int64_t>, double> counts;
  for (const auto& [remaining, prob] : frontier) {
    std::vector<std::int64_t> taken(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      taken[i] = urn.items[i] - remaining[i];
    }
    counts[taken] += prob;
  }
  return counts;
}

inline std::vector<double> wallenius_exact_mean(const UrnSpec& urn) {
  const auto dist = wallenius_exact_distribution(urn);
  std::vector<double> mean(urn.groups(), 0.0);
  for (const auto& [taken, prob] : dist) {
    for (std::size_t i = 0; i < taken.size(); ++i) {
      mean[i] += prob * static_cast<double>(taken[i]);
    }
  }
  return mean;
}

// Central multivariate hypergeometric pmf (all weights equal).
inline double hypergeometric_pmf(const std::vector<std::int64_t>& x,
                                 const std::vector<std::int64_t>& m) {
  std::int64_t total_m = 0;
  std::int64_t total_x = 0;
  double numerator = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    numerator *= static_cast<double>(
        binomial(static_cast<int>(m[i]), static_cast<int>(x[i])));
    total_m += m[i];
    total_x += x[i];
  }
  return numerator / static_cast<double>(binomial(static_cast<int>(total_m),
                                                  static_cast<int>(total_x)));
}

}  // namespace fpshap::test
