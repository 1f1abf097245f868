#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "fpshap/errors.hpp"

namespace fpshap::detail {

// Gauss-Legendre nodes/weights on [-1, 1], generated by Newton iteration on
// the Legendre recurrence (no hard-coded tables to mistype).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(
    int n) {
  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    weights[static_cast<std::size_t>(i)] = w;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return {nodes, weights};
}

template <int N>
const std::pair<std::vector<double>, std::vector<double>>& gauss_rule() {
  static const auto rule = gauss_legendre(N);
  return rule;
}

template <int N, typename F>
double gauss_on_interval(F&& f, double a, double b) {
  const auto& [nodes, weights] = gauss_rule<N>();
  const double mid = 0.5 * (a + b);
  const double width = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    sum += weights[i] * f(mid + width * nodes[i]);
  }
  return width * sum;
}

// Adaptive bisection with a G7/G15 error estimate. Gauss rules are open, so
// the endpoints a and b are never evaluated.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                          int max_depth = 48) {
  struct Frame {
    double a, b, tol;
    int depth;
  };
  double total = 0.0;
  std::vector<Frame> stack{{a, b, abs_tol, 0}};
  while (!stack.empty()) {
    const Frame frame = stack.back();
    stack.pop_back();
    const double coarse = gauss_on_interval<7>(f, frame.a, frame.b);
    const double fine = gauss_on_interval<15>(f, frame.a, frame.b);
    const double err = std::abs(fine - coarse);
    if (err <= frame.tol || frame.depth >= max_depth) {
      total += fine;
      continue;
    }
    const double mid = 0.5 * (frame.a + frame.b);
    stack.push_back({frame.a, mid, 0.5 * frame.tol, frame.depth + 1});
    stack.push_back({mid, frame.b, 0.5 * frame.tol, frame.depth + 1});
  }
  return total;
}

}  // namespace fpshap::detail
