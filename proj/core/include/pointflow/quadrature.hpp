#pragma once

#include <array>
#include <vector>

namespace pointflow {

/// Quadrature rule on a triangle in barycentric coordinates. Weights are
/// fractions of the triangle area (they sum to 1), so an integral is
/// `area * sum_q weights[q] * f(points[q])`.
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Conical-product (collapsed) Gauss rule exact for polynomials of total
/// degree <= `degree`. All points lie strictly inside the triangle.
const TriangleRule& triangle_rule(int degree);

}  // namespace pointflow
