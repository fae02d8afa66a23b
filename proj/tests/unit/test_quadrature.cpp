#include <cmath>

#include <gtest/gtest.h>

#include "pointflow/quadrature.hpp"

namespace pointflow {
namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Integral of x^a y^b over the reference triangle (0,0), (1,0), (0,1).
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

TEST(TriangleRule, IntegratesMonomialsExactly) {
  for (int degree = 0; degree <= 20; ++degree) {
    const auto& rule = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const double x = rule.points[q][1], y = rule.points[q][2];
          s += rule.weights[q] * std::pow(x, a) * std::pow(y, b);
        }
        EXPECT_NEAR(0.5 * s, monomial_integral(a, b), 1e-14) << "degree " << degree << " x^" << a << " y^" << b;
      }
    }
  }
}

TEST(TriangleRule, PointsStrictlyInteriorAndWeightsPositive) {
  for (int degree = 0; degree <= 30; ++degree) {
    const auto& rule = triangle_rule(degree);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      for (double l : rule.points[q]) EXPECT_GT(l, 0.0);
      EXPECT_NEAR(rule.points[q][0] + rule.points[q][1] + rule.points[q][2], 1.0, 1e-15);
      EXPECT_GT(rule.weights[q], 0.0);
      sum += rule.weights[q];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(GaussLegendre, MatchesKnownTwoPointRule) {
  std::vector<double> x, w;
  gauss_legendre_01(2, x, w);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(x[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(x[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(w[0], 0.5, 1e-15);
}

}  // namespace
}  // namespace pointflow
