#include "pointflow/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "pointflow/errors.hpp"

namespace pointflow {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("gauss_legendre_01: n must be positive");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  // P_n(x) and P_n'(x) by the three-term recurrence
  auto legendre = [n](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    const auto slot = static_cast<std::size_t>(n - 1 - i);
    nodes[slot] = 0.5 * (x + 1.0);
    weights[slot] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

TriangleRule make_rule(int degree) {
  const int n = (degree + 3) / 2;  // 2n - 1 >= degree + 1
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double eta = x[static_cast<std::size_t>(j)];
      const double l1 = xi;
      const double l2 = eta * (1.0 - xi);
      rule.points.push_back({1.0 - l1 - l2, l1, l2});
      rule.weights.push_back(2.0 * w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * (1.0 - xi));
    }
  }
  return rule;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  constexpr int kMaxDegree = 30;
  if (degree < 0 || degree > kMaxDegree) throw InvalidArgument("triangle_rule: unsupported degree");
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> r;
    for (int d = 0; d <= kMaxDegree; ++d) r.push_back(make_rule(d));
    return r;
  }();
  return rules[static_cast<std::size_t>(degree)];
}

}  // namespace pointflow
