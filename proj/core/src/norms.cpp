#include "pointflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pointflow/errors.hpp"
#include "pointflow/quadrature.hpp"

namespace pointflow {

namespace {

constexpr int kNearSourceDegree = 6;

void check_velocity(const TaylorHoodSpace& space, const Eigen::VectorXd& v) {
  if (v.size() != space.n_u()) throw InvalidArgument("norm: velocity size does not match the space");
}

std::unordered_set<int> source_nodes(const TaylorHoodSpace& space, const DiracSourceSet& sources) {
  std::unordered_set<int> nodes;
  const double tol = 1e-12 * space.mesh().domain().diameter();
  for (const auto& t : sources.points()) {
    if (auto n = space.mesh().find_node(t, tol)) nodes.insert(*n);
  }
  return nodes;
}

bool touches_source(const TaylorHoodSpace& space, int k, const std::unordered_set<int>& nodes,
                    const DiracSourceSet& sources) {
  const auto& tri = space.mesh().triangles()[static_cast<std::size_t>(k)];
  for (int v : tri) {
    if (nodes.count(v)) return true;
  }
  if (nodes.size() == static_cast<std::size_t>(sources.size())) return false;
  // A source that is not a node can still sit inside the element.
  for (const auto& t : sources.points()) {
    const auto l = barycentric_coordinates(space.mesh(), k, t);
    if (std::min({l[0], l[1], l[2]}) >= -1e-14) return true;
  }
  return false;
}

template <class F>
double integrate_cells(const TaylorHoodSpace& space, int degree, F&& per_point) {
  const auto& rule = triangle_rule(degree);
  double sum = 0.0;
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) local += rule.weights[q] * per_point(k, rule.points[q], g);
    sum += g.area * local;
  }
  return sum;
}

}  // namespace

double weighted_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity,
                         const MuckenhouptWeight& w, int sign, int degree) {
  check_velocity(space, velocity);
  if (sign != 1 && sign != -1) throw InvalidArgument("weighted_seminorm: sign must be +1 or -1");
  const auto nodes = source_nodes(space, w.sources());
  const auto& base = triangle_rule(degree);
  const auto& near = triangle_rule(std::max(degree, kNearSourceDegree));
  double sum = 0.0;
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    const auto& rule = touches_source(space, k, nodes, w.sources()) ? near : base;
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 value;
      Mat2 grad;
      velocity_on_cell(space, velocity, k, rule.points[q], g, value, grad);
      const Vec2 x = g.map(rule.points[q]);
      const double rho = sign > 0 ? w.eval(x) : w.eval_inverse(x);
      if (!std::isfinite(rho)) throw InternalError("weighted_seminorm: quadrature point hit a source");
      local += rule.weights[q] * grad.squaredNorm() * rho;
    }
    sum += g.area * local;
  }
  return std::sqrt(sum);
}

double lp_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, double p, int degree) {
  check_velocity(space, velocity);
  if (!(p > 1.0 && p < 2.0)) throw InvalidArgument("lp_seminorm: p must lie in (1,2)");
  const double s = integrate_cells(space, degree, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 value;
    Mat2 grad;
    velocity_on_cell(space, velocity, k, l, g, value, grad);
    return std::pow(grad.norm(), p);
  });
  return std::pow(s, 1.0 / p);
}

double h1_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity) {
  check_velocity(space, velocity);
  const double s = integrate_cells(space, 2, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 value;
    Mat2 grad;
    velocity_on_cell(space, velocity, k, l, g, value, grad);
    return grad.squaredNorm();
  });
  return std::sqrt(s);
}

double l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity) {
  check_velocity(space, velocity);
  const double s = integrate_cells(space, 4, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 value;
    Mat2 grad;
    velocity_on_cell(space, velocity, k, l, g, value, grad);
    return value.squaredNorm();
  });
  return std::sqrt(s);
}

double l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const VectorField& exact,
                int degree) {
  check_velocity(space, velocity);
  const double s = integrate_cells(space, degree, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 value;
    Mat2 grad;
    velocity_on_cell(space, velocity, k, l, g, value, grad);
    return (value - exact(g.map(l))).squaredNorm();
  });
  return std::sqrt(s);
}

double h1_error(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const GradientField& exact,
                int degree) {
  check_velocity(space, velocity);
  const double s = integrate_cells(space, degree, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 value;
    Mat2 grad;
    velocity_on_cell(space, velocity, k, l, g, value, grad);
    return (grad - exact(g.map(l))).squaredNorm();
  });
  return std::sqrt(s);
}

double l2_norm_squared(const TaylorHoodSpace& space, const VectorField& f, int degree) {
  return integrate_cells(space, degree, [&](int, const std::array<double, 3>& l, const ElementGeometry& g) {
    return f(g.map(l)).squaredNorm();
  });
}

}  // namespace pointflow
