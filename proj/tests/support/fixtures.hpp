#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "pointflow/adjoint.hpp"
#include "pointflow/assembly.hpp"
#include "pointflow/geometry.hpp"
#include "pointflow/ns_state.hpp"
#include "pointflow/quadrature.hpp"
#include "pointflow/reduced_problem.hpp"

namespace pointflow::testing {

// Divergence-free velocity from the stream function
// psi = A x^2 (1-x)^2 y^2 (1-y)^2, pressure p = x - 1/2.
struct Manufactured {
  double A = 10.0;
  double nu = 1.0;

  Vec2 u(const Vec2& p) const {
    const double x = p.x(), y = p.y();
    return {2 * A * x * x * y * (x - 1) * (x - 1) * (y - 1) * (2 * y - 1),
            -2 * A * x * y * y * (x - 1) * (2 * x - 1) * (y - 1) * (y - 1)};
  }
  Mat2 grad(const Vec2& p) const {
    const double x = p.x(), y = p.y();
    const double ux = 4 * A * x * y * (x - 1) * (2 * x - 1) * (y - 1) * (2 * y - 1);
    const double uy = 2 * A * x * x * (x - 1) * (x - 1) * (6 * y * y - 6 * y + 1);
    const double vx = -2 * A * y * y * (y - 1) * (y - 1) * (6 * x * x - 6 * x + 1);
    Mat2 g;
    g << ux, uy, vx, -ux;
    return g;
  }
  Vec2 laplacian(const Vec2& p) const {
    const double x = p.x(), y = p.y();
    const double lu = 4 * A * (2 * y - 1) *
                      (3 * x * x * x * x - 6 * x * x * x + 6 * x * x * y * y - 6 * x * x * y + 3 * x * x - 6 * x * y * y +
                       6 * x * y + y * y - y);
    const double lv = -4 * A * (2 * x - 1) *
                      (6 * x * x * y * y - 6 * x * x * y + x * x - 6 * x * y * y + 6 * x * y - x + 3 * y * y * y * y -
                       6 * y * y * y + 3 * y * y);
    return {lu, lv};
  }
  double pressure(const Vec2& p) const { return p.x() - 0.5; }
  Vec2 grad_pressure(const Vec2&) const { return {1.0, 0.0}; }

  /// -nu lap u + (u . grad) u + grad p, or the Stokes part only.
  Vec2 forcing(const Vec2& p, bool convection) const {
    Vec2 f = -nu * laplacian(p) + grad_pressure(p);
    if (convection) f += grad(p) * u(p);
    return f;
  }
};

inline std::shared_ptr<const TaylorHoodSpace> unit_space(int n) {
  return std::make_shared<const TaylorHoodSpace>(std::make_shared<const TriMesh>(build_unit_square_mesh(n)));
}

inline std::shared_ptr<const TaylorHoodSpace> graded_space(int n, const std::vector<Vec2>& points, int levels,
                                                           double ratio = 0.5) {
  const auto base = build_unit_square_mesh(n);
  return std::make_shared<const TaylorHoodSpace>(
      std::make_shared<const TriMesh>(grade_toward_points(base, points, levels, ratio)));
}

inline std::shared_ptr<const NavierStokesModel> make_model(int n, const std::vector<Vec2>& points, double nu,
                                                           int levels = 1) {
  auto space = graded_space(n, points, levels);
  return std::make_shared<const NavierStokesModel>(space, nu, DiracSourceSet(points, space->mesh().domain()));
}

inline ControlVector random_control(int dim, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  ControlVector u(dim);
  for (int i = 0; i < dim; ++i) u[i] = d(rng);
  return u;
}

inline Eigen::VectorXd random_interior_velocity(const TaylorHoodSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(space.n_u());
  for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
  for (int i : space.boundary_velocity_dofs()) v[i] = 0.0;
  return v;
}

/// Mesh integral of integrand(k, barycentric, geometry) with each element
/// split into 4^levels congruent sub-triangles, each carrying a degree
/// `degree` rule.
template <class F>
double refined_integral(const TaylorHoodSpace& space, int levels, int degree, F&& integrand) {
  const auto& rule = triangle_rule(degree);
  double total = 0.0;
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    // Sub-triangles in barycentric coordinates.
    using Sub = std::array<std::array<double, 3>, 3>;
    std::vector<Sub> subs(1);
    subs[0][0] = {1, 0, 0};
    subs[0][1] = {0, 1, 0};
    subs[0][2] = {0, 0, 1};
    for (int l = 0; l < levels; ++l) {
      std::vector<Sub> next;
      for (const auto& s : subs) {
        auto mid = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
          return std::array<double, 3>{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
        };
        const auto m01 = mid(s[0], s[1]), m12 = mid(s[1], s[2]), m20 = mid(s[2], s[0]);
        next.push_back({s[0], m01, m20});
        next.push_back({m01, s[1], m12});
        next.push_back({m20, m12, s[2]});
        next.push_back({m01, m12, m20});
      }
      subs = std::move(next);
    }
    const double sub_area = g.area / static_cast<double>(subs.size());
    for (const auto& s : subs) {
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        std::array<double, 3> l{};
        for (int a = 0; a < 3; ++a) {
          l[static_cast<std::size_t>(a)] = rule.points[q][0] * s[0][static_cast<std::size_t>(a)] +
                                           rule.points[q][1] * s[1][static_cast<std::size_t>(a)] +
                                           rule.points[q][2] * s[2][static_cast<std::size_t>(a)];
        }
        total += sub_area * rule.weights[q] * integrand(k, l, g);
      }
    }
  }
  return total;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace pointflow::testing
