#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fpshap/bootstrap.hpp"
#include "fpshap/dataset.hpp"
#include "fpshap/errors.hpp"
#include "fpshap/oracle.hpp"
#include "fpshap/sampling.hpp"
#include "fpshap/shapley.hpp"

// The two-arm simulation protocol: R independent coalition samples give a
// "resampled" standard deviation per Shapley value (the benchmark), and for
// every sample each bootstrap method produces B replicate estimates whose
// standard deviation is averaged over the runs. The with-replacement arm
// repeats the resampling part under classic frequency-weighted KernelSHAP
// sampling for comparison.

namespace fpshap {

struct CsvSource {
  std::filesystem::path path;
  std::string response_column;
  double split_fraction = 0.5;
};

enum class OracleKind {
  // Per-coalition regression of the fitted model's predictions (the realistic
  // pipeline: contribution estimates are fixed but not exactly affine in the
  // coalition indicators, so subsampling has real variance).
  kCoalitionRegression,
  // Exact marginal expectation of the fitted linear model. For a linear model
  // this is affine in the indicators, so every solvable coalition sample
  // reproduces the exact Shapley values and all SDs collapse to zero; useful
  // for exactness checks, degenerate for uncertainty studies.
  kMarginalLinear,
};

inline OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "regression") return OracleKind::kCoalitionRegression;
  if (name == "marginal") return OracleKind::kMarginalLinear;
  throw ArgumentError("unknown oracle kind '" + name +
                      "' (regression|marginal)");
}

struct StudyConfig {
  std::variant<CsvSource, SyntheticSpec> data;
  std::uint64_t n_total = 0;
  int runs = 300;
  int replicates = 300;
  std::vector<BootstrapMethod> methods = {BootstrapMethod::kSymmetric,
                                          BootstrapMethod::kDoubledHalf};
  bool with_replacement_baseline = false;
  // Explicit 0-based indices into the explain split; when empty the first
  // `default_instance_count` explained rows are used.
  std::vector<Eigen::Index> instances;
  int default_instance_count = 20;
  std::uint64_t seed = 42;
  double anchor_weight = kDefaultAnchorWeight;
  OracleKind oracle_kind = OracleKind::kCoalitionRegression;
  bool keep_run_estimates = false;
};

struct StudyData {
  Dataset dataset;
  std::shared_ptr<const ContributionOracle> oracle;
  std::vector<Eigen::Index> instance_indices;
  Eigen::MatrixXd x_stars;  // instances x p
};

inline StudyData load_study_data(const StudyConfig& config) {
  Dataset dataset =
      std::holds_alternative<CsvSource>(config.data)
          ? [&] {
              const auto& src = std::get<CsvSource>(config.data);
              return load_csv(src.path, src.response_column,
                              src.split_fraction);
            }()
          : generate_synthetic(std::get<SyntheticSpec>(config.data),
                               config.seed);
  std::shared_ptr<const ContributionOracle> oracle;
  if (config.oracle_kind == OracleKind::kCoalitionRegression) {
    oracle = std::make_shared<CoalitionRegressionOracle>(dataset);
  } else {
    oracle = std::make_shared<LinearMarginalOracle>(fit_linear(dataset));
  }

  std::vector<Eigen::Index> indices = config.instances;
  if (indices.empty()) {
    const Eigen::Index count =
        std::min<Eigen::Index>(config.default_instance_count,
                               dataset.explain_rows());
    for (Eigen::Index i = 0; i < count; ++i) indices.push_back(i);
  }
  for (const Eigen::Index i : indices) {
    if (i < 0 || i >= dataset.explain_rows()) {
      throw ArgumentError("instance index " + std::to_string(i) +
                          " outside the explain split (0.." +
                          std::to_string(dataset.explain_rows() - 1) + ")");
    }
  }
  Eigen::MatrixXd x_stars(static_cast<Eigen::Index>(indices.size()),
                          dataset.feature_count());
  const auto explain = dataset.explain_features();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    x_stars.row(static_cast<Eigen::Index>(i)) = explain.row(indices[i]);
  }
  return StudyData{std::move(dataset), std::move(oracle), std::move(indices),
                   std::move(x_stars)};
}

struct ArmSummary {
  Eigen::MatrixXd mean_estimate;    // instances x features
  Eigen::MatrixXd resampled_sd;     // instances x features
  Eigen::MatrixXd resampled_sd_se;  // Monte-Carlo SE of the resampled SD
};

struct MethodSummary {
  BootstrapMethod method;
  Eigen::MatrixXd mean_boot_sd;  // instances x features
  double mean_failed_replicates = 0.0;
};

struct StudyReport {
  std::vector<std::string> feature_names;
  std::vector<Eigen::Index> instances;
  int runs = 0;
  int replicates = 0;
  std::uint64_t n_total = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd exact_phi;  // instances x features
  ArmSummary srswor;
  std::vector<MethodSummary> methods;
  std::optional<ArmSummary> baseline;
  std::vector<Eigen::MatrixXd> run_estimates;  // kept on request
};

// Mean / SD / SE-of-SD across runs, elementwise. Shifted accumulation keeps
// identical runs at an exact zero SD; the result changes only by floating
// reassociation (<= 1e-12 relative) under any permutation of the runs.
inline ArmSummary summarize_runs(
    const std::vector<Eigen::MatrixXd>& run_estimates) {
  if (run_estimates.size() < 2) {
    throw ArgumentError("summarize_runs: need at least 2 runs");
  }
  const Eigen::Index rows = run_estimates.front().rows();
  const Eigen::Index cols = run_estimates.front().cols();
  const double count = static_cast<double>(run_estimates.size());
  ArmSummary out;
  out.mean_estimate.resize(rows, cols);
  out.resampled_sd.resize(rows, cols);
  out.resampled_sd_se.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double shift = run_estimates.front()(i, j);
      double s1 = 0.0, s2 = 0.0;
      for (const Eigen::MatrixXd& run : run_estimates) {
        const double d = run(i, j) - shift;
        s1 += d;
        s2 += d * d;
      }
      const double mean = shift + s1 / count;
      const double var =
          std::max(0.0, (s2 - s1 * s1 / count) / (count - 1.0));
      out.mean_estimate(i, j) = mean;
      out.resampled_sd(i, j) = std::sqrt(var);
      // Normal-theory approximation: SE(sd) ~ sd / sqrt(2 (R - 1)).
      out.resampled_sd_se(i, j) =
          out.resampled_sd(i, j) / std::sqrt(2.0 * (count - 1.0));
    }
  }
  return out;
}

namespace detail {

// One run of the without-replacement arm: all instances solved against a
// shared coalition sample.
inline Eigen::MatrixXd estimate_run(const CoalitionSample& sample,
                                    const ContributionOracle& oracle,
                                    const Eigen::MatrixXd& x_stars,
                                    const std::string& context) {
  const BatchSystem batch = build_batch_system(sample, oracle, x_stars);
  const Eigen::MatrixXd weighted = batch.weights.asDiagonal() * batch.design;
  const Eigen::MatrixXd normal = batch.design.transpose() * weighted;
  const Eigen::MatrixXd rhs = weighted.transpose() * batch.values;
  const Eigen::MatrixXd solution =
      solve_normal_equations(normal, rhs, context, nullptr);
  Eigen::MatrixXd estimates(x_stars.rows(), oracle.feature_count());
  for (Eigen::Index i = 0; i < x_stars.rows(); ++i) {
    estimates.row(i) =
        solution.col(i).tail(oracle.feature_count()).transpose();
  }
  return estimates;
}

inline Eigen::MatrixXd estimate_baseline_run(
    const WithReplacementSample& sample, const ContributionOracle& oracle,
    const Eigen::MatrixXd& x_stars, const std::string& context) {
  Eigen::MatrixXd estimates(x_stars.rows(), oracle.feature_count());
  for (Eigen::Index i = 0; i < x_stars.rows(); ++i) {
    const WlsSystem system =
        build_frequency_system(sample, oracle, x_stars.row(i).transpose());
    const ShapleyExplanation explanation = solve_shapley(system, context);
    estimates.row(i) = explanation.phi.transpose();
  }
  return estimates;
}

}  // namespace detail

inline void validate_config(const StudyConfig& config) {
  if (config.runs < 2) throw ArgumentError("study: runs must be >= 2");
  if (config.replicates < 2 && !config.methods.empty()) {
    throw ArgumentError("study: replicates must be >= 2");
  }
}

inline StudyReport run_study(const StudyConfig& config) {
  validate_config(config);
  const StudyData data = load_study_data(config);
  const int p = data.dataset.feature_count();
  const SamplingPlan plan =
      plan_sample(p, config.n_total, config.anchor_weight);
  const PairingStructure pairing =
      PairingStructure::build(p, config.anchor_weight);
  const auto instances =
      static_cast<Eigen::Index>(data.instance_indices.size());

  StudyReport report;
  report.feature_names = data.dataset.feature_names;
  report.instances = data.instance_indices;
  report.runs = config.runs;
  report.replicates = config.replicates;
  report.n_total = config.n_total;
  report.seed = config.seed;

  // Ground truth: the full-enumeration solve under the same contribution
  // estimates (zero sampling uncertainty).
  report.exact_phi.resize(instances, p);
  for (Eigen::Index i = 0; i < instances; ++i) {
    report.exact_phi.row(i) =
        exact_shapley(*data.oracle, data.x_stars.row(i).transpose(),
                      config.anchor_weight)
            .phi.transpose();
  }

  std::vector<CoalitionSample> samples;
  samples.reserve(static_cast<std::size_t>(config.runs));
  std::vector<Eigen::MatrixXd> run_estimates;
  run_estimates.reserve(static_cast<std::size_t>(config.runs));
  for (int r = 0; r < config.runs; ++r) {
    const std::uint64_t run_seed =
        derive_seed(config.seed, seed_stream::kRunSample,
                    static_cast<std::uint64_t>(r));
    CoalitionSample sample = draw_sample(plan, pairing, run_seed);
    try {
      run_estimates.push_back(detail::estimate_run(
          sample, *data.oracle, data.x_stars, "run " + std::to_string(r)));
    } catch (const Error& e) {
      throw Error("study aborted at run " + std::to_string(r) + ": " +
                  e.what());
    }
    samples.push_back(std::move(sample));
  }
  report.srswor = summarize_runs(run_estimates);

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const BootstrapMethod method = config.methods[m];
    MethodSummary summary;
    summary.method = method;
    summary.mean_boot_sd = Eigen::MatrixXd::Zero(instances, p);
    double failed_total = 0.0;
    for (int r = 0; r < config.runs; ++r) {
      const std::uint64_t boot_seed =
          derive_seed(config.seed, seed_stream::kBootstrap,
                      static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(r));
      try {
        const BatchBootstrapSd boot = bootstrap_sd_batch(
            samples[static_cast<std::size_t>(r)], *data.oracle, data.x_stars,
            config.replicates, method, boot_seed);
        summary.mean_boot_sd += boot.sd;
        failed_total += static_cast<double>(boot.failed_replicates);
      } catch (const Error& e) {
        throw Error("study aborted at run " + std::to_string(r) + " (" +
                    to_string(method) + " bootstrap): " + e.what());
      }
    }
    summary.mean_boot_sd /= static_cast<double>(config.runs);
    summary.mean_failed_replicates =
        failed_total / static_cast<double>(config.runs);
    report.methods.push_back(std::move(summary));
  }

  if (config.with_replacement_baseline) {
    std::vector<Eigen::MatrixXd> baseline_estimates;
    baseline_estimates.reserve(static_cast<std::size_t>(config.runs));
    for (int r = 0; r < config.runs; ++r) {
      const std::uint64_t run_seed =
          derive_seed(config.seed, seed_stream::kBaseline,
                      static_cast<std::uint64_t>(r));
      const WithReplacementSample sample = draw_with_replacement_baseline(
          p, config.n_total, run_seed, config.anchor_weight);
      try {
        baseline_estimates.push_back(detail::estimate_baseline_run(
            sample, *data.oracle, data.x_stars,
            "baseline run " + std::to_string(r)));
      } catch (const Error& e) {
        throw Error("study aborted at baseline run " + std::to_string(r) +
                    ": " + e.what());
      }
    }
    report.baseline = summarize_runs(baseline_estimates);
  }

  if (config.keep_run_estimates) {
    report.run_estimates = std::move(run_estimates);
  }
  return report;
}

// One sampled explanation per instance (single draw shared across instances),
// with bootstrap standard deviations for each requested method.
struct MethodSd {
  BootstrapMethod method;
  Eigen::VectorXd sd;
  int failed_replicates = 0;
};

struct ExplainResult {
  Eigen::Index instance = 0;
  ShapleyExplanation explanation;
  std::vector<MethodSd> method_sd;
};

inline std::vector<ExplainResult> explain(const StudyConfig& config) {
  const StudyData data = load_study_data(config);
  const int p = data.dataset.feature_count();
  const SamplingPlan plan =
      plan_sample(p, config.n_total, config.anchor_weight);
  const PairingStructure pairing =
      PairingStructure::build(p, config.anchor_weight);
  const CoalitionSample sample = draw_sample(
      plan, pairing, derive_seed(config.seed, seed_stream::kRunSample, 0));

  std::vector<ExplainResult> results;
  for (std::size_t i = 0; i < data.instance_indices.size(); ++i) {
    ExplainResult result;
    result.instance = data.instance_indices[i];
    const Eigen::VectorXd x_star =
        data.x_stars.row(static_cast<Eigen::Index>(i)).transpose();
    result.explanation =
        solve_shapley(build_system(sample, *data.oracle, x_star),
                      "explain instance " + std::to_string(result.instance));
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const BootstrapSd boot = bootstrap_sd(
          sample, *data.oracle, x_star, config.replicates, config.methods[m],
          derive_seed(config.seed, seed_stream::kBootstrap,
                      static_cast<std::uint64_t>(m), 0));
      result.method_sd.push_back(
          {config.methods[m], boot.sd, boot.failed_replicates});
    }
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace fpshap
