#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/dataset.hpp"
#include "fpshap/errors.hpp"

namespace fpshap {

// Contribution function v(S): the expected model output when the features in
// S are fixed at the explained point. Implementations must be pure; they are
// shared freely across threads.
class ContributionOracle {
 public:
  virtual ~ContributionOracle() = default;

  virtual int feature_count() const = 0;

  // v(S) at the explained point x_star.
  virtual double contribution(const CoalitionMask& coalition,
                              const Eigen::VectorXd& x_star) const = 0;

  // v(empty) -- by construction the mean training prediction.
  virtual double value_empty() const = 0;

  // v(grand) = f(x_star).
  virtual double predict(const Eigen::VectorXd& x_star) const = 0;
};

// Linear model with the marginal (independent-features) expectation, which is
// exact: v(S) = beta0 + sum_{j in S} beta_j x*_j + sum_{j not in S} beta_j
// mean_j. Every downstream sampling/bootstrap check stays sharp because no
// Monte-Carlo noise enters through v.
class LinearMarginalOracle final : public ContributionOracle {
 public:
  LinearMarginalOracle(double beta0, Eigen::VectorXd beta,
                       Eigen::VectorXd feature_means)
      : beta0_(beta0),
        beta_(std::move(beta)),
        feature_means_(std::move(feature_means)) {
    if (beta_.size() != feature_means_.size() || beta_.size() == 0) {
      throw ArgumentError("LinearMarginalOracle: beta/means size mismatch");
    }
    mean_prediction_ = beta0_ + beta_.dot(feature_means_);
  }

  int feature_count() const override { return static_cast<int>(beta_.size()); }

  double contribution(const CoalitionMask& coalition,
                      const Eigen::VectorXd& x_star) const override {
    if (coalition.feature_count() != feature_count() ||
        x_star.size() != beta_.size()) {
      throw ArgumentError("contribution: dimension mismatch");
    }
    // The extremes anchor the least-squares system and must match the
    // reported base value and prediction bit for bit.
    if (coalition.is_empty()) return mean_prediction_;
    if (coalition.is_grand()) return predict(x_star);
    double v = mean_prediction_;
    for (int j = 0; j < feature_count(); ++j) {
      if (coalition.contains(j)) {
        v += beta_(j) * (x_star(j) - feature_means_(j));
      }
    }
    return v;
  }

  double value_empty() const override { return mean_prediction_; }

  double predict(const Eigen::VectorXd& x_star) const override {
    return beta0_ + beta_.dot(x_star);
  }

  double beta0() const { return beta0_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& feature_means() const { return feature_means_; }

 private:
  double beta0_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd feature_means_;
  double mean_prediction_;
};

// Contribution estimates in the style of separate per-coalition regressions:
// for a coalition S, the fitted model's predictions are regressed (OLS, with
// intercept) on the training columns of S, and v(S) is that fit evaluated at
// x*_S. The empty regression is the intercept-only fit (mean prediction) and
// the full regression reproduces the model itself, so the anchors are exact.
// Unlike the closed-form marginal expectation, v(S) here is NOT affine in the
// coalition indicators: the finite-sample regressions leave structure outside
// the span of the design matrix, which is what gives coalition subsampling a
// real variance to estimate.
//
// Implementation note: with G = D^T D and b = D^T f(X) over the full training
// design D = [1 X], the coalition regression solves the corresponding
// principal subsystem of G c = b, so no per-coalition pass over the data is
// needed. Coefficients are cached per mask.
class CoalitionRegressionOracle final : public ContributionOracle {
 public:
  explicit CoalitionRegressionOracle(const Dataset& ds)
      : linear_(fit_linear_impl(ds)) {
    const auto X = ds.train_features();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = X;
    Eigen::VectorXd coef(p + 1);
    coef(0) = linear_.beta0();
    coef.tail(p) = linear_.beta();
    const Eigen::VectorXd predictions = design * coef;
    gram_ = design.transpose() * design;
    moment_ = design.transpose() * predictions;
    value_empty_ = predictions.mean();
  }

  int feature_count() const override { return linear_.feature_count(); }

  double contribution(const CoalitionMask& coalition,
                      const Eigen::VectorXd& x_star) const override {
    if (coalition.feature_count() != feature_count() ||
        x_star.size() != linear_.beta().size()) {
      throw ArgumentError("contribution: dimension mismatch");
    }
    if (coalition.is_empty()) return value_empty_;
    if (coalition.is_grand()) return predict(x_star);
    const Eigen::VectorXd& coeffs = coefficients(coalition);
    double v = coeffs(0);
    Eigen::Index slot = 1;
    for (int j = 0; j < feature_count(); ++j) {
      if (coalition.contains(j)) v += coeffs(slot++) * x_star(j);
    }
    return v;
  }

  double value_empty() const override { return value_empty_; }

  double predict(const Eigen::VectorXd& x_star) const override {
    return linear_.predict(x_star);
  }

  const LinearMarginalOracle& fitted_model() const { return linear_; }

 private:
  static LinearMarginalOracle fit_linear_impl(const Dataset& ds);

  const Eigen::VectorXd& coefficients(const CoalitionMask& coalition) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto [it, inserted] = cache_.try_emplace(coalition.bits());
    if (inserted) {
      std::vector<Eigen::Index> idx{0};
      for (int j = 0; j < feature_count(); ++j) {
        if (coalition.contains(j)) idx.push_back(j + 1);
      }
      const auto k = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd sub_gram(k, k);
      Eigen::VectorXd sub_moment(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        sub_moment(a) = moment_(idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < k; ++b) {
          sub_gram(a, b) = gram_(idx[static_cast<std::size_t>(a)],
                                 idx[static_cast<std::size_t>(b)]);
        }
      }
      // Principal submatrices of the (positive-definite) Gram matrix stay
      // positive definite, so Cholesky cannot fail here.
      it->second = Eigen::LLT<Eigen::MatrixXd>(sub_gram).solve(sub_moment);
    }
    return it->second;
  }

  LinearMarginalOracle linear_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  double value_empty_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::uint32_t, Eigen::VectorXd> cache_;
};

// Ordinary least squares on the training split. The stored feature means are
// training means, so value_empty() is exactly the mean training prediction.
inline LinearMarginalOracle fit_linear(const Dataset& ds) {
  const auto X = ds.train_features();
  const auto y = ds.train_response();
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n < p + 1) throw FitError("fit_linear: fewer rows than coefficients");

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p + 1) {
    throw FitError("fit_linear: design matrix is rank-deficient (rank " +
                   std::to_string(qr.rank()) + " of " + std::to_string(p + 1) +
                   ")");
  }
  const Eigen::VectorXd coef = qr.solve(y);
  return LinearMarginalOracle(coef(0), coef.tail(p),
                              X.colwise().mean().transpose());
}

inline LinearMarginalOracle CoalitionRegressionOracle::fit_linear_impl(
    const Dataset& ds) {
  return fit_linear(ds);
}

}  // namespace fpshap
