#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pointflow/ns_state.hpp"

namespace pointflow {

/// Desired velocity y_Omega: an analytic field (projected by quadrature) or a
/// discrete P2 velocity on the model's space.
class TrackingTarget {
 public:
  static TrackingTarget analytic(VectorField f);
  static TrackingTarget discrete(Eigen::VectorXd velocity);

  bool is_discrete() const { return discrete_.has_value(); }

  /// b_i = int y_Omega . phi_i.
  Eigen::VectorXd load(const TaylorHoodSpace& space, const SparseMatrix& mass) const;
  /// 1/2 ||y - y_Omega||^2_{L2}.
  double tracking_cost(const TaylorHoodSpace& space, const SparseMatrix& mass, const Eigen::VectorXd& y) const;

 private:
  std::optional<VectorField> analytic_;
  std::optional<Eigen::VectorXd> discrete_;
};

struct AdjointSolution {
  FlowField field;
  std::vector<Vec2> sources;
  std::vector<Vec2> point_values;  // z(t) for each source t
};

/// Solves J^T (z, r) = (M y - b, 0) with the state's factorized Jacobian.
AdjointSolution solve_adjoint(const NavierStokesModel& model, const StateSolution& state,
                              const TrackingTarget& target);

/// Exact P2 evaluation of the adjoint velocity at the sources.
std::vector<Vec2> adjoint_point_values(const AdjointSolution& adj);

}  // namespace pointflow
