#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "fpshap/errors.hpp"

namespace fpshap {

// Conditioning limit on the normal-equations matrix. Beyond it a system is
// treated as rank-deficient and the solve fails loudly; callers that resample
// count those failures instead of papering over them with pseudo-inverses.
inline constexpr double kConditionLimit = 1e12;

// One row per coalition: design(row, 0) = 1, design(row, j + 1) = membership
// of feature j; `weights` is the diagonal of W (already inclusion-probability
// adjusted where applicable); `values` is v(S).
struct WlsSystem {
  Eigen::MatrixXd design;
  Eigen::VectorXd weights;
  Eigen::VectorXd values;
  // Index of the sampled pair each row came from, -1 for the anchor rows.
  // Metadata used by replicate reweighting; empty for fully enumerated
  // systems.
  std::vector<int> row_pair;

  int feature_count() const { return static_cast<int>(design.cols()) - 1; }
  Eigen::Index rows() const { return design.rows(); }
};

struct SolverDiagnostics {
  // lambda_max / lambda_min of Z^T W Z; 1.0 marks analytic (closed-form)
  // results that never touched a factorization.
  double condition = 0.0;
};

struct ShapleyExplanation {
  double phi0 = 0.0;
  Eigen::VectorXd phi;
  SolverDiagnostics diagnostics;

  double total() const { return phi0 + phi.sum(); }
};

namespace detail {

inline void validate_system(const WlsSystem& system) {
  if (system.rows() < 2) {
    throw ArgumentError("WlsSystem: need at least the two anchor rows");
  }
  if (system.weights.size() != system.rows() ||
      system.values.size() != system.rows()) {
    throw ArgumentError("WlsSystem: weight/value length mismatch");
  }
  if ((system.weights.array() <= 0.0).any()) {
    throw ArgumentError("WlsSystem: weights must be strictly positive");
  }
}

// Checks Z^T W Z for rank deficiency and returns its condition number.
// The eigendecomposition is only the diagnostic; the solve itself goes
// through a Cholesky factorization.
inline double diagnose_normal_matrix(const Eigen::MatrixXd& normal,
                                     const std::string& context) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(
      normal, Eigen::EigenvaluesOnly);
  const double lambda_min = eigs.eigenvalues().minCoeff();
  const double lambda_max = eigs.eigenvalues().maxCoeff();
  if (!(lambda_min > 0.0) || !(lambda_max > 0.0)) {
    throw SingularSystemError(
        context + ": normal equations are rank-deficient (min eigenvalue " +
            std::to_string(lambda_min) + ")",
        std::numeric_limits<double>::infinity());
  }
  const double condition = lambda_max / lambda_min;
  if (condition > kConditionLimit) {
    throw SingularSystemError(
        context + ": normal equations condition " + std::to_string(condition) +
            " exceeds limit",
        condition);
  }
  return condition;
}

// Solves (Z^T W Z) X = B for (possibly several) right-hand sides.
// Throws SingularSystemError on rank deficiency.
inline Eigen::MatrixXd solve_normal_equations(const Eigen::MatrixXd& normal,
                                              const Eigen::MatrixXd& rhs,
                                              const std::string& context,
                                              double* condition_out) {
  const double condition = diagnose_normal_matrix(normal, context);
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError(context + ": Cholesky factorization failed",
                              condition);
  }
  if (condition_out != nullptr) *condition_out = condition;
  return llt.solve(rhs);
}

}  // namespace detail

// Solves (Z^T W Z) phi = Z^T W v.
inline ShapleyExplanation solve_shapley(const WlsSystem& system,
                                        const std::string& context = "solve") {
  detail::validate_system(system);
  const Eigen::MatrixXd weighted =
      system.weights.asDiagonal() * system.design;
  const Eigen::MatrixXd normal = system.design.transpose() * weighted;
  const Eigen::VectorXd rhs = weighted.transpose() * system.values;

  ShapleyExplanation out;
  const Eigen::MatrixXd solution = detail::solve_normal_equations(
      normal, rhs, context, &out.diagnostics.condition);
  out.phi0 = solution(0, 0);
  out.phi = solution.col(0).tail(system.feature_count());
  return out;
}

}  // namespace fpshap
