#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pointflow/geometry.hpp"

namespace pointflow {

using Mat2 = Eigen::Matrix2d;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Affine data of one triangle: vertices, area, and the constant gradients
/// of its barycentric coordinates.
struct ElementGeometry {
  std::array<Vec2, 3> vertices;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Vec2 map(const std::array<double, 3>& lambda) const {
    return lambda[0] * vertices[0] + lambda[1] * vertices[1] + lambda[2] * vertices[2];
  }
};

/// Quadratic Lagrange basis on a triangle, local order v0 v1 v2 e01 e12 e20.
struct P2Basis {
  static std::array<double, 6> values(const std::array<double, 3>& l);
  static std::array<Vec2, 6> gradients(const std::array<double, 3>& l, const ElementGeometry& g);
};

/// Continuous P2 (vector) velocity / P1 pressure pair on a TriMesh.
///
/// Scalar P2 dofs are the mesh nodes followed by the mesh edges; vector
/// velocity dof (s, c) lives at index 2 * s + c. Pressure dofs are the nodes.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(std::shared_ptr<const TriMesh> mesh);

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  const PointLocator& locator() const { return locator_; }

  int n_scalar() const { return mesh_->num_nodes() + mesh_->num_edges(); }
  int n_u() const { return 2 * n_scalar(); }
  int n_p() const { return mesh_->num_nodes(); }

  static int vdof(int scalar, int component) { return 2 * scalar + component; }

  /// Scalar P2 dofs of triangle k in local basis order.
  std::array<int, 6> cell_dofs(int k) const;
  ElementGeometry geometry(int k) const;

  /// Coordinates of scalar dof s (a node, or an edge midpoint).
  Vec2 dof_point(int s) const;

  const std::vector<int>& boundary_velocity_dofs() const { return boundary_dofs_; }
  bool is_boundary_velocity_dof(int i) const { return boundary_mask_[static_cast<std::size_t>(i)]; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  PointLocator locator_;
  std::vector<int> boundary_dofs_;
  std::vector<bool> boundary_mask_;
};

enum class FieldRole { state, adjoint, sensitivity, second_sensitivity };

/// Discrete velocity/pressure pair on a TaylorHoodSpace.
struct FlowField {
  std::shared_ptr<const TaylorHoodSpace> space;
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
  FieldRole role = FieldRole::state;

  /// Exact P2 evaluation; throws NotFound outside the mesh.
  Vec2 velocity_at(const Vec2& x) const;
};

FlowField zero_field(std::shared_ptr<const TaylorHoodSpace> space, FieldRole role);

/// P2 velocity interpolant (nodal values at vertices and edge midpoints).
Eigen::VectorXd interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f);
/// P1 pressure interpolant.
Eigen::VectorXd interpolate_pressure(const TaylorHoodSpace& space, const std::function<double(const Vec2&)>& f);

/// P2 evaluation of a velocity coefficient vector at x.
Vec2 evaluate_velocity_at(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const Vec2& x);
Vec2 evaluate_velocity_at(const FlowField& field, const Vec2& x);

/// Velocity value and gradient (row c = gradient of component c) inside
/// triangle k at barycentric point l.
void velocity_on_cell(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, int k,
                      const std::array<double, 3>& l, const ElementGeometry& g, Vec2& value, Mat2& grad);

}  // namespace pointflow
