#include "pointflow/reduced_problem.hpp"

#include <vector>

#include "pointflow/errors.hpp"
#include "pointflow/parallel.hpp"

namespace pointflow {

ReducedProblem::ReducedProblem(std::shared_ptr<const NavierStokesModel> model, TrackingTarget target, double eta,
                               StateSolveOptions opts)
    : model_(std::move(model)), target_(std::move(target)), eta_(eta), opts_(opts) {
  if (!(eta_ > 0.0)) throw InvalidArgument("eta must be positive");
}

Evaluation ReducedProblem::evaluate(const ControlVector& u, bool with_gradient, const Evaluation* warm_start) const {
  if (u.size() != dim()) throw InvalidArgument("control vector length does not match the sources");
  Evaluation ev;
  ev.u = u;
  ev.state = model_->solve_state(u, opts_, warm_start ? &warm_start->state.field : nullptr);
  require_converged(ev.state);
  ev.cost = target_.tracking_cost(model_->space(), model_->system().M, ev.state.field.velocity) +
            0.5 * eta_ * u.squaredNorm();
  if (with_gradient) add_gradient(ev);
  return ev;
}

void ReducedProblem::add_gradient(Evaluation& ev) const {
  if (ev.adjoint) return;
  ev.adjoint = solve_adjoint(*model_, ev.state, target_);
  ev.gradient.resize(dim());
  for (int t = 0; t < model_->sources().size(); ++t) {
    const Vec2 psi = ev.adjoint->point_values[static_cast<std::size_t>(t)] + eta_ * control_at(ev.u, t);
    ev.gradient[2 * t] = psi.x();
    ev.gradient[2 * t + 1] = psi.y();
  }
}

double ReducedProblem::reduced_cost(const ControlVector& u) const { return evaluate(u, false).cost; }

GradientVector ReducedProblem::reduced_gradient(const ControlVector& u) const { return evaluate(u, true).gradient; }

const AdjointSolution& ReducedProblem::adjoint_of(const Evaluation& at) const {
  if (!at.adjoint) throw InvalidArgument("evaluation carries no adjoint");
  return *at.adjoint;
}

FlowField ReducedProblem::sensitivity(const Evaluation& at, const ControlVector& v) const {
  return solve_linearized(at.state, model_->dirac_load(v));
}

double ReducedProblem::hessian_quadratic_form(const Evaluation& at, const ControlVector& v) const {
  const auto& z = adjoint_of(at).field.velocity;
  const FlowField theta = sensitivity(at, v);
  const auto& M = model_->system().M;
  const double c = z.dot(assemble_trilinear(model_->space(), theta.velocity, theta.velocity));
  return theta.velocity.dot(M * theta.velocity) - 2.0 * c + eta_ * v.squaredNorm();
}

double ReducedProblem::hessian_quadratic_form(const ControlVector& u, const ControlVector& v) const {
  return hessian_quadratic_form(evaluate(u, true), v);
}

double ReducedProblem::hessian_tensor_form(const Evaluation& at, const ControlVector& v) const {
  const auto& z = adjoint_of(at).field.velocity;
  const FlowField theta = sensitivity(at, v);
  const auto& M = model_->system().M;
  return theta.velocity.dot(M * theta.velocity) + 2.0 * tensor_form_curvature(model_->space(), theta.velocity, z) +
         eta_ * v.squaredNorm();
}

Eigen::MatrixXd ReducedProblem::assemble_reduced_hessian(const Evaluation& at) const {
  const auto& z = adjoint_of(at).field.velocity;
  const int n = dim();
  std::vector<Eigen::VectorXd> thetas(static_cast<std::size_t>(n));
  parallel_for(n, [&](int i) {
    thetas[static_cast<std::size_t>(i)] = sensitivity(at, ControlVector::Unit(n, i)).velocity;
  });
  const auto& M = model_->system().M;
  const Eigen::MatrixXd T = convective_gram(model_->space(), thetas, z);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd mi = M * thetas[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) H(i, j) = mi.dot(thetas[static_cast<std::size_t>(j)]) - (T(i, j) + T(j, i));
    H(i, i) += eta_;
  }
  return H;
}

Eigen::MatrixXd ReducedProblem::assemble_reduced_hessian(const ControlVector& u) const {
  return assemble_reduced_hessian(evaluate(u, true));
}

}  // namespace pointflow
