#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/errors.hpp"
#include "fpshap/kernel.hpp"
#include "fpshap/oracle.hpp"
#include "fpshap/sampling.hpp"
#include "fpshap/wls.hpp"

namespace fpshap {

namespace detail {

inline void fill_design_row(Eigen::MatrixXd& design, Eigen::Index row,
                            const CoalitionMask& mask) {
  design(row, 0) = 1.0;
  for (int j = 0; j < mask.feature_count(); ++j) {
    design(row, j + 1) = mask.contains(j) ? 1.0 : 0.0;
  }
}

}  // namespace detail

// Assembles the sampled weighted least-squares system. Rows are ordered by
// ascending mask bits (anchors land first and last), which makes a
// full-budget sample assemble the exact same matrix as the full enumeration.
// Each sampled row's weight is its kernel weight divided by the stratum
// inclusion probability (Horvitz-Thompson correction); anchors keep the
// anchor weight untouched.
inline WlsSystem build_system(const CoalitionSample& sample,
                              const ContributionOracle& oracle,
                              const Eigen::VectorXd& x_star) {
  if (!sample.with_anchors) {
    throw ConstructionError(
        "build_system: sample lacks the empty/grand anchor coalitions");
  }
  if (oracle.feature_count() != sample.p || x_star.size() != sample.p) {
    throw ArgumentError("build_system: dimension mismatch");
  }
  const int p = sample.p;
  const KernelWeightTable kernel = make_kernel_table(p, sample.anchor_weight);

  struct Row {
    CoalitionMask mask;
    double weight;
    int pair;
  };
  std::vector<Row> layout;
  layout.reserve(static_cast<std::size_t>(sample.coalition_count()));
  layout.push_back({CoalitionMask::empty(p), sample.anchor_weight, -1});
  layout.push_back({CoalitionMask::grand(p), sample.anchor_weight, -1});
  for (std::size_t i = 0; i < sample.pairs.size(); ++i) {
    const SampledPair& pair = sample.pairs[i];
    for (const CoalitionMask& mask : {pair.representative, pair.partner}) {
      layout.push_back({mask,
                        kernel.at(mask.size()) / pair.inclusion_probability,
                        static_cast<int>(i)});
    }
  }
  std::sort(layout.begin(), layout.end(),
            [](const Row& a, const Row& b) { return a.mask.bits() < b.mask.bits(); });

  const auto rows = static_cast<Eigen::Index>(layout.size());
  WlsSystem system;
  system.design.resize(rows, p + 1);
  system.weights.resize(rows);
  system.values.resize(rows);
  system.row_pair.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index row = 0; row < rows; ++row) {
    const Row& r = layout[static_cast<std::size_t>(row)];
    detail::fill_design_row(system.design, row, r.mask);
    system.weights(row) = r.weight;
    system.values(row) = oracle.contribution(r.mask, x_star);
    system.row_pair[static_cast<std::size_t>(row)] = r.pair;
  }
  return system;
}

// System for the with-replacement comparison arm: anchors plus one row per
// unique sampled coalition weighted by its sampling frequency.
inline WlsSystem build_frequency_system(const WithReplacementSample& sample,
                                        const ContributionOracle& oracle,
                                        const Eigen::VectorXd& x_star) {
  if (oracle.feature_count() != sample.p || x_star.size() != sample.p) {
    throw ArgumentError("build_frequency_system: dimension mismatch");
  }
  const int p = sample.p;
  const auto rows = static_cast<Eigen::Index>(sample.entries.size()) + 2;

  WlsSystem system;
  system.design.resize(rows, p + 1);
  system.weights.resize(rows);
  system.values.resize(rows);

  Eigen::Index row = 0;
  const CoalitionMask empty = CoalitionMask::empty(p);
  detail::fill_design_row(system.design, row, empty);
  system.weights(row) = sample.anchor_weight;
  system.values(row) = oracle.contribution(empty, x_star);
  ++row;
  for (const FrequencyEntry& entry : sample.entries) {
    detail::fill_design_row(system.design, row, entry.mask);
    system.weights(row) = static_cast<double>(entry.frequency);
    system.values(row) = oracle.contribution(entry.mask, x_star);
    ++row;
  }
  const CoalitionMask grand = CoalitionMask::grand(p);
  detail::fill_design_row(system.design, row, grand);
  system.weights(row) = sample.anchor_weight;
  system.values(row) = oracle.contribution(grand, x_star);
  return system;
}

// Ground truth: the full 2^p kernel-weighted system. No sampling, no
// uncertainty.
inline ShapleyExplanation exact_shapley(
    const ContributionOracle& oracle, const Eigen::VectorXd& x_star,
    double anchor_weight = kDefaultAnchorWeight) {
  const int p = oracle.feature_count();
  const std::vector<CoalitionMask> all = enumerate_coalitions(p);
  const KernelWeightTable kernel = make_kernel_table(p, anchor_weight);

  WlsSystem system;
  const auto rows = static_cast<Eigen::Index>(all.size());
  system.design.resize(rows, p + 1);
  system.weights.resize(rows);
  system.values.resize(rows);
  for (Eigen::Index row = 0; row < rows; ++row) {
    const CoalitionMask& mask = all[static_cast<std::size_t>(row)];
    detail::fill_design_row(system.design, row, mask);
    system.weights(row) = kernel.at(mask.size());
    system.values(row) = oracle.contribution(mask, x_star);
  }
  return solve_shapley(system, "exact_shapley");
}

// Analytic Shapley values for a linear model under the marginal contribution
// function: phi_j = beta_j (x*_j - mean_j), phi0 = mean prediction. Used as
// the independent closed-form reference for everything estimated above.
inline ShapleyExplanation closed_form_linear_shapley(
    const ContributionOracle& oracle, const Eigen::VectorXd& x_star) {
  const auto* linear = dynamic_cast<const LinearMarginalOracle*>(&oracle);
  if (linear == nullptr) {
    throw UnsupportedOracleError(
        "closed_form_linear_shapley: oracle is not linear-marginal");
  }
  if (x_star.size() != linear->beta().size()) {
    throw ArgumentError("closed_form_linear_shapley: dimension mismatch");
  }
  ShapleyExplanation out;
  out.phi0 = linear->value_empty();
  out.phi = linear->beta().cwiseProduct(x_star - linear->feature_means());
  out.diagnostics.condition = 1.0;
  return out;
}

}  // namespace fpshap
