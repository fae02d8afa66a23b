#include "pointflow/adjoint.hpp"

#include "pointflow/errors.hpp"
#include "pointflow/norms.hpp"

namespace pointflow {

TrackingTarget TrackingTarget::analytic(VectorField f) {
  TrackingTarget t;
  t.analytic_ = std::move(f);
  return t;
}

TrackingTarget TrackingTarget::discrete(Eigen::VectorXd velocity) {
  TrackingTarget t;
  t.discrete_ = std::move(velocity);
  return t;
}

Eigen::VectorXd TrackingTarget::load(const TaylorHoodSpace& space, const SparseMatrix& mass) const {
  if (discrete_) {
    if (discrete_->size() != space.n_u()) throw InvalidArgument("discrete target does not match the space");
    return mass * *discrete_;
  }
  return assemble_body_load(space, *analytic_);
}

double TrackingTarget::tracking_cost(const TaylorHoodSpace& space, const SparseMatrix& mass,
                                     const Eigen::VectorXd& y) const {
  if (discrete_) {
    if (discrete_->size() != y.size()) throw InvalidArgument("discrete target does not match the space");
    const Eigen::VectorXd d = y - *discrete_;
    return 0.5 * d.dot(mass * d);
  }
  const Eigen::VectorXd b = assemble_body_load(space, *analytic_);
  return 0.5 * (y.dot(mass * y) - 2.0 * y.dot(b) + l2_norm_squared(space, *analytic_));
}

AdjointSolution solve_adjoint(const NavierStokesModel& model, const StateSolution& state,
                              const TrackingTarget& target) {
  if (!state.jacobian) throw InvalidArgument("solve_adjoint: state carries no Jacobian");
  const auto& M = model.system().M;
  const Eigen::VectorXd rhs = M * state.field.velocity - target.load(model.space(), M);
  AdjointSolution adj;
  adj.field = state.jacobian->solve_transpose(rhs, FieldRole::adjoint);
  adj.field.space = model.space_ptr();
  adj.sources = model.sources().points();
  adj.point_values = adjoint_point_values(adj);
  return adj;
}

std::vector<Vec2> adjoint_point_values(const AdjointSolution& adj) {
  std::vector<Vec2> values;
  values.reserve(adj.sources.size());
  for (const auto& t : adj.sources) values.push_back(evaluate_velocity_at(adj.field, t));
  return values;
}

}  // namespace pointflow
