#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fpshap/oracle.hpp"
#include "fpshap/rng.hpp"
#include "fpshap/sampling.hpp"
#include "fpshap/shapley.hpp"
#include "fpshap/wls.hpp"

// Finite-population bootstrap over the sampled coalition pairs. A replicate
// assigns each pair a multiplicity S in {0, 1, 2}; valid schemes must satisfy
// E(S) = 1, Var(S) = 1 - n/N and within-stratum Cov(S_k, S_l) =
// -Var(S)/(n - 1), which together force the replicate total to stay at n and
// the counts of 0s and 2s to balance within every stratum. Resampling acts at
// pair level so the complement structure survives in every replicate; the
// anchors always keep multiplicity 1.

namespace fpshap {

enum class BootstrapMethod {
  kSymmetric,
  kDoubledHalf,
};

inline std::string to_string(BootstrapMethod method) {
  return method == BootstrapMethod::kSymmetric ? "symmetric" : "doubled-half";
}

// Per-stratum category counts for the Symmetric bootstrap. With n of N pairs
// drawn, the number of doubled pairs has expectation n2 = n(1 - n/N)/2; when
// that is fractional a Bernoulli pick alternates between the two neighbouring
// integers, fresh in every replicate, so the moments hold on average.
struct SymmetricCounts {
  std::uint64_t pairs_drawn = 0;      // n
  std::uint64_t pairs_in_stratum = 0; // N
  double n2_real = 0.0;
  std::uint64_t n2_low = 0;
  std::uint64_t n2_high = 0;
  double bern_p = 0.0;  // probability of choosing n2_high
};

inline SymmetricCounts symmetric_counts(std::uint64_t pairs_drawn,
                                        std::uint64_t pairs_in_stratum) {
  if (pairs_drawn < 1 || pairs_drawn > pairs_in_stratum) {
    throw ArgumentError("symmetric_counts: need 1 <= n <= N");
  }
  SymmetricCounts counts;
  counts.pairs_drawn = pairs_drawn;
  counts.pairs_in_stratum = pairs_in_stratum;
  const double n = static_cast<double>(pairs_drawn);
  const double N = static_cast<double>(pairs_in_stratum);
  counts.n2_real = 0.5 * n * (1.0 - n / N);
  counts.n2_low = static_cast<std::uint64_t>(std::floor(counts.n2_real));
  counts.bern_p = counts.n2_real - static_cast<double>(counts.n2_low);
  // n1 = n - 2 n2 must stay nonnegative, which caps n2 at floor(n/2). Only
  // the rounded-up branch can hit the cap (odd n with n2_real just above
  // floor(n/2) - 1/2).
  counts.n2_high =
      std::min(counts.n2_low + (counts.bern_p > 0.0 ? 1 : 0), pairs_drawn / 2);
  if (counts.n2_high < counts.n2_low) counts.n2_high = counts.n2_low;
  return counts;
}

// Multiplicity per sampled pair, aligned with CoalitionSample::pairs. Both
// members of a pair share the multiplicity; anchors are implicitly 1.
struct ReplicateWeights {
  std::vector<std::uint8_t> pair_multiplicity;
};

namespace detail {

inline void validate_sample_for_replicates(const CoalitionSample& sample) {
  std::uint64_t total = 0;
  for (const auto& st : sample.strata) total += st.drawn_pairs;
  if (total != sample.pairs.size()) {
    throw ArgumentError("replicate: stratum counts disagree with pair list");
  }
}

inline std::vector<std::uint32_t> stratum_order(std::uint64_t count,
                                                std::size_t offset, Rng& rng) {
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), static_cast<std::uint32_t>(offset));
  rng.shuffle(idx);
  return idx;
}

}  // namespace detail

// Symmetric bootstrap: per stratum choose n2 (Bernoulli rounding fresh each
// replicate), then a uniform partition of the drawn pairs into n2 doubled,
// n2 dropped and n - 2 n2 kept-once.
inline ReplicateWeights symmetric_replicate(const CoalitionSample& sample,
                                            std::uint64_t seed) {
  detail::validate_sample_for_replicates(sample);
  ReplicateWeights weights;
  weights.pair_multiplicity.assign(sample.pairs.size(), 1);
  Rng rng(seed);
  for (const auto& st : sample.strata) {
    if (st.drawn_pairs == 0) continue;
    const SymmetricCounts counts =
        symmetric_counts(st.drawn_pairs, st.population_pairs);
    std::uint64_t n2 = counts.n2_low;
    if (counts.n2_high != counts.n2_low) {
      n2 = rng.bernoulli(counts.bern_p) ? counts.n2_high : counts.n2_low;
    }
    if (n2 == 0) continue;
    const auto order =
        detail::stratum_order(st.drawn_pairs, st.first_pair, rng);
    for (std::uint64_t i = 0; i < n2; ++i) {
      weights.pair_multiplicity[order[static_cast<std::size_t>(i)]] = 2;
    }
    for (std::uint64_t i = n2; i < 2 * n2; ++i) {
      weights.pair_multiplicity[order[static_cast<std::size_t>(i)]] = 0;
    }
  }
  return weights;
}

// Doubled-half bootstrap (Antal-Tille style), small-sample exact form. Per
// stratum the replicate either keeps every pair once (the Bernoulli selection
// step, taken jointly at design probability) or doubles one half of the pairs
// and drops the other half; for odd n one uniformly chosen pair is kept once
// so the replicate total stays at n. The mixing probability is chosen so that
// Var(S) = 1 - n/N and the covariance condition hold exactly; the naive
// per-pair Bernoulli version misses the covariance target for small strata.
inline ReplicateWeights doubled_half_replicate(const CoalitionSample& sample,
                                               std::uint64_t seed) {
  detail::validate_sample_for_replicates(sample);
  ReplicateWeights weights;
  weights.pair_multiplicity.assign(sample.pairs.size(), 1);
  Rng rng(seed);
  for (const auto& st : sample.strata) {
    const std::uint64_t n = st.drawn_pairs;
    const std::uint64_t N = st.population_pairs;
    if (n == 0) continue;
    if (n > N) throw ArgumentError("doubled_half_replicate: n > N");
    // A single pair (or a fully enumerated stratum) carries no resampling
    // variance to express.
    if (n == N || n == 1) continue;

    const double pi = static_cast<double>(n) / static_cast<double>(N);
    const bool odd = (n % 2) == 1;
    // Variance of the doubling branch: 1 for even n, 1 - 1/n for odd n.
    const double branch_var =
        odd ? 1.0 - 1.0 / static_cast<double>(n) : 1.0;
    const double keep_all_prob =
        std::clamp(1.0 - (1.0 - pi) / branch_var, 0.0, 1.0);
    if (rng.bernoulli(keep_all_prob)) continue;

    const auto order = detail::stratum_order(n, st.first_pair, rng);
    std::size_t cursor = 0;
    if (odd) ++cursor;  // order[0] stays at multiplicity 1
    const std::uint64_t doubled = (n - (odd ? 1 : 0)) / 2;
    for (std::uint64_t i = 0; i < doubled; ++i) {
      weights.pair_multiplicity[order[cursor++]] = 2;
    }
    while (cursor < order.size()) {
      weights.pair_multiplicity[order[cursor++]] = 0;
    }
  }
  return weights;
}

inline ReplicateWeights make_replicate(const CoalitionSample& sample,
                                       BootstrapMethod method,
                                       std::uint64_t seed) {
  return method == BootstrapMethod::kSymmetric
             ? symmetric_replicate(sample, seed)
             : doubled_half_replicate(sample, seed);
}

struct BootstrapSd {
  Eigen::VectorXd sd;        // per feature
  int failed_replicates = 0;
};

struct BatchBootstrapSd {
  Eigen::MatrixXd sd;        // instances x features
  int failed_replicates = 0;
};

namespace detail {

struct BatchSystem {
  Eigen::MatrixXd design;
  Eigen::VectorXd weights;
  std::vector<int> row_pair;
  Eigen::MatrixXd values;  // rows x instances
};

inline BatchSystem build_batch_system(const CoalitionSample& sample,
                                      const ContributionOracle& oracle,
                                      const Eigen::MatrixXd& x_stars) {
  BatchSystem batch;
  for (Eigen::Index i = 0; i < x_stars.rows(); ++i) {
    WlsSystem system =
        build_system(sample, oracle, x_stars.row(i).transpose());
    if (i == 0) {
      batch.design = std::move(system.design);
      batch.weights = std::move(system.weights);
      batch.row_pair = std::move(system.row_pair);
      batch.values.resize(batch.design.rows(), x_stars.rows());
    }
    batch.values.col(i) = system.values;
  }
  return batch;
}

// Applies pair multiplicities to the batch system: weights scale with the
// multiplicity and zero-multiplicity rows drop out entirely, so the
// rank/conditioning diagnostic sees exactly the rows a resample retained.
// Returns the (p+1) x instances solution block.
inline Eigen::MatrixXd solve_replicate(const BatchSystem& batch,
                                       const ReplicateWeights& replicate,
                                       const std::string& context) {
  const Eigen::Index rows = batch.design.rows();
  std::vector<Eigen::Index> kept;
  kept.reserve(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int pair = batch.row_pair[static_cast<std::size_t>(r)];
    if (pair < 0 ||
        replicate.pair_multiplicity[static_cast<std::size_t>(pair)] > 0) {
      kept.push_back(r);
    }
  }
  const auto kept_count = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd design(kept_count, batch.design.cols());
  Eigen::VectorXd weights(kept_count);
  Eigen::MatrixXd values(kept_count, batch.values.cols());
  for (Eigen::Index i = 0; i < kept_count; ++i) {
    const Eigen::Index r = kept[static_cast<std::size_t>(i)];
    const int pair = batch.row_pair[static_cast<std::size_t>(r)];
    const double mult =
        pair < 0 ? 1.0
                 : static_cast<double>(
                       replicate.pair_multiplicity[static_cast<std::size_t>(
                           pair)]);
    design.row(i) = batch.design.row(r);
    weights(i) = batch.weights(r) * mult;
    values.row(i) = batch.values.row(r);
  }
  const Eigen::MatrixXd weighted = weights.asDiagonal() * design;
  const Eigen::MatrixXd normal = design.transpose() * weighted;
  const Eigen::MatrixXd rhs = weighted.transpose() * values;
  return solve_normal_equations(normal, rhs, context, nullptr);
}

}  // namespace detail

// Bootstrap standard deviations for several explained instances sharing one
// coalition sample. Replicate seeds derive from (seed, replicate index), so
// results are independent of scheduling and identical to the single-instance
// overload.
inline BatchBootstrapSd bootstrap_sd_batch(const CoalitionSample& sample,
                                           const ContributionOracle& oracle,
                                           const Eigen::MatrixXd& x_stars,
                                           int replicates,
                                           BootstrapMethod method,
                                           std::uint64_t seed) {
  if (replicates < 2) {
    throw ArgumentError("bootstrap_sd: need at least 2 replicates");
  }
  if (x_stars.rows() < 1) {
    throw ArgumentError("bootstrap_sd: need at least one instance");
  }
  const detail::BatchSystem batch =
      detail::build_batch_system(sample, oracle, x_stars);
  const Eigen::Index instances = x_stars.rows();
  const int p = sample.p;

  std::vector<Eigen::MatrixXd> phis;
  phis.reserve(static_cast<std::size_t>(replicates));
  int failed = 0;

  for (int b = 0; b < replicates; ++b) {
    const std::uint64_t replicate_seed =
        derive_seed(seed, seed_stream::kReplicate,
                    static_cast<std::uint64_t>(b));
    const ReplicateWeights replicate =
        make_replicate(sample, method, replicate_seed);
    try {
      Eigen::MatrixXd solution = detail::solve_replicate(
          batch, replicate,
          to_string(method) + " replicate " + std::to_string(b));
      phis.push_back(std::move(solution));
    } catch (const SingularSystemError&) {
      ++failed;
    }
  }

  const auto successes = static_cast<Eigen::Index>(phis.size());
  if (successes < 2) {
    throw EstimationFailedError(
        "bootstrap_sd: only " + std::to_string(successes) + " of " +
        std::to_string(replicates) +
        " replicates were solvable; cannot form a standard deviation");
  }

  BatchBootstrapSd out;
  out.failed_replicates = failed;
  out.sd.resize(instances, p);
  const double count = static_cast<double>(successes);
  for (Eigen::Index i = 0; i < instances; ++i) {
    for (int j = 0; j < p; ++j) {
      // Shifted accumulation: identical replicates give an exact zero.
      const double shift = phis.front()(j + 1, i);
      double s1 = 0.0, s2 = 0.0;
      for (const Eigen::MatrixXd& solution : phis) {
        const double d = solution(j + 1, i) - shift;
        s1 += d;
        s2 += d * d;
      }
      const double var =
          std::max(0.0, (s2 - s1 * s1 / count) / (count - 1.0));
      out.sd(i, j) = std::sqrt(var);
    }
  }
  return out;
}

inline BootstrapSd bootstrap_sd(const CoalitionSample& sample,
                                const ContributionOracle& oracle,
                                const Eigen::VectorXd& x_star, int replicates,
                                BootstrapMethod method, std::uint64_t seed) {
  Eigen::MatrixXd x_stars(1, x_star.size());
  x_stars.row(0) = x_star.transpose();
  BatchBootstrapSd batch =
      bootstrap_sd_batch(sample, oracle, x_stars, replicates, method, seed);
  BootstrapSd out;
  out.sd = batch.sd.row(0).transpose();
  out.failed_replicates = batch.failed_replicates;
  return out;
}

}  // namespace fpshap
