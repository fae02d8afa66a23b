#include "pointflow/ns_state.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "pointflow/errors.hpp"

namespace pointflow {

NavierStokesModel::NavierStokesModel(std::shared_ptr<const TaylorHoodSpace> space, double nu, DiracSourceSet sources)
    : space_(std::move(space)), system_(assemble_stokes(*space_, nu)), sources_(std::move(sources)) {
  stokes_matrix_ = build_saddle_matrix(*space_, system_, nullptr);
  stokes_ = std::make_shared<SaddleOperator>(space_, system_, nullptr);
}

Eigen::VectorXd NavierStokesModel::dirac_load(const ControlVector& u) const {
  if (u.size() != num_controls()) throw InvalidArgument("control vector length does not match the sources");
  const auto pairs = control_pairs(u);
  return assemble_dirac_load(*space_, sources_, pairs);
}

Eigen::VectorXd NavierStokesModel::pack(const FlowField& f) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(stokes_->size());
  x.head(space_->n_u()) = f.velocity;
  x.segment(space_->n_u(), space_->n_p()) = f.pressure;
  return x;
}

Eigen::VectorXd NavierStokesModel::residual_full(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const {
  const int nu = space_->n_u();
  Eigen::VectorXd r = stokes_matrix_ * x - rhs;
  Eigen::VectorXd conv = assemble_trilinear(*space_, x.head(nu), x.head(nu));
  for (int i : space_->boundary_velocity_dofs()) conv[i] = 0.0;
  r.head(nu) += conv;
  return r;
}

double NavierStokesModel::relative_residual(const FlowField& field, const Eigen::VectorXd& load) const {
  const Eigen::VectorXd rhs = stokes_->embed_velocity_rhs(load);
  const double scale = rhs.norm();
  const double r = residual_full(pack(field), rhs).norm();
  return scale > 0.0 ? r / scale : r;
}

StateSolution NavierStokesModel::solve_state(const ControlVector& u, const StateSolveOptions& opts,
                                             const FlowField* initial_guess) const {
  return solve_state_with_load(dirac_load(u), opts, initial_guess);
}

StateSolution NavierStokesModel::solve_state_with_load(const Eigen::VectorXd& load, const StateSolveOptions& opts,
                                                       const FlowField* initial_guess) const {
  if (!(opts.newton_tol > 0.0) || opts.picard_iters < 0 || opts.newton_max_iters < 0 || opts.continuation_steps < 0) {
    throw InvalidArgument("state solve options out of range");
  }
  const int nu = space_->n_u();
  const Eigen::VectorXd rhs_full = stokes_->embed_velocity_rhs(load);
  const double scale = rhs_full.norm();

  StateSolution sol;
  sol.load = load;
  sol.nu = system_.nu;
  if (scale == 0.0) {
    sol.field = zero_field(space_, FieldRole::state);
    sol.converged = true;
    sol.residual_history = {0.0};
    sol.jacobian = stokes_;
    return sol;
  }

  auto jacobian_at = [&](const Eigen::VectorXd& x, bool picard) {
    const auto blocks = assemble_convection(*space_, Eigen::VectorXd(x.head(nu)));
    if (picard) return std::make_shared<SaddleOperator>(space_, system_, &blocks.C1);
    const SparseMatrix c = blocks.C1 + blocks.C2;
    return std::make_shared<SaddleOperator>(space_, system_, &c);
  };
  auto rel = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
    return residual_full(x, rhs).norm() / rhs.norm();
  };

  Eigen::VectorXd best_x;
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<double> history;

  // Damped Newton from x toward rhs; returns true on convergence.
  auto newton = [&](Eigen::VectorXd& x, const Eigen::VectorXd& rhs, bool final_stage) {
    double res = rel(x, rhs);
    if (final_stage) history.push_back(res);
    for (int it = 0; it < opts.newton_max_iters && res > opts.newton_tol; ++it) {
      const auto jac = jacobian_at(x, false);
      const Eigen::VectorXd dx = jac->solve_full(-residual_full(x, rhs));
      double step = 1.0;
      bool accepted = false;
      for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
        const Eigen::VectorXd trial = x + step * dx;
        const double tr = rel(trial, rhs);
        if (std::isfinite(tr) && tr < (1.0 - 1e-4 * step) * res) {
          x = trial;
          res = tr;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      if (final_stage) history.push_back(res);
    }
    if (final_stage && res < best_res) {
      best_res = res;
      best_x = x;
    }
    return res <= opts.newton_tol;
  };

  auto picard = [&](Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
    for (int it = 0; it < opts.picard_iters; ++it) {
      const Eigen::VectorXd next = jacobian_at(x, true)->solve_full(rhs);
      if (!next.allFinite()) break;
      x = next;
    }
  };

  bool ok = false;
  Eigen::VectorXd x;
  if (initial_guess) {
    if (initial_guess->velocity.size() != nu || initial_guess->pressure.size() != space_->n_p()) {
      throw InvalidArgument("initial guess does not match the space");
    }
    x = pack(*initial_guess);
    ok = newton(x, rhs_full, true);
    if (!ok) history.clear();
  }
  if (!ok) {
    x = stokes_->solve_full(rhs_full);
    picard(x, rhs_full);
    ok = newton(x, rhs_full, true);
  }

  for (int steps = 1; !ok && steps <= opts.continuation_steps; ++steps) {
    // Load continuation 0 -> 1 in `steps + 1` stages.
    const int stages = steps + 1;
    Eigen::VectorXd xc = stokes_->solve_full(rhs_full / stages);
    bool stage_ok = true;
    for (int s = 1; s <= stages && stage_ok; ++s) {
      const Eigen::VectorXd rhs_s = rhs_full * (static_cast<double>(s) / stages);
      if (s == 1) picard(xc, rhs_s);
      stage_ok = newton(xc, rhs_s, s == stages);
    }
    ok = stage_ok;
  }

  if (best_x.size() == 0) best_x = x;
  sol.field = stokes_->split(best_x, FieldRole::state);
  sol.converged = best_res <= opts.newton_tol;
  sol.residual_history = std::move(history);
  if (sol.residual_history.empty() || sol.residual_history.back() != best_res) sol.residual_history.push_back(best_res);
  sol.jacobian = jacobian_at(best_x, false);
  return sol;
}

FlowField solve_linearized(const StateSolution& state, const Eigen::VectorXd& load) {
  if (!state.jacobian) throw InvalidArgument("solve_linearized: state carries no Jacobian");
  return state.jacobian->solve(load, FieldRole::sensitivity);
}

FlowField solve_second_sensitivity(const StateSolution& state, const FlowField& theta1, const FlowField& theta2) {
  if (!state.jacobian) throw InvalidArgument("solve_second_sensitivity: state carries no Jacobian");
  const auto& space = state.jacobian->space();
  const Eigen::VectorXd a = assemble_trilinear(space, theta1.velocity, theta2.velocity);
  const Eigen::VectorXd b = assemble_trilinear(space, theta2.velocity, theta1.velocity);
  const Eigen::VectorXd rhs = -(a + b);
  return state.jacobian->solve(rhs, FieldRole::second_sensitivity);
}

double regularity_indicator(const StateSolution& state) {
  if (!state.jacobian) throw InvalidArgument("regularity_indicator: state carries no Jacobian");
  if (state.nu == 1.0) return state.jacobian->rcond();
  // momentum rows divided by nu, pressure and multiplier rescaled to match
  const auto& space = state.jacobian->space();
  const int n = state.jacobian->size();
  Eigen::VectorXd rows = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd cols = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < space.n_u(); ++i) {
    if (!space.is_boundary_velocity_dof(i)) rows[i] = 1.0 / state.nu;
  }
  cols.segment(space.n_u(), space.n_p()).setConstant(state.nu);
  rows[n - 1] = 1.0 / state.nu;
  return state.jacobian->scaled_rcond(rows, cols);
}

void require_converged(const StateSolution& state) {
  if (!state.converged) {
    throw NonConvergence("state solve did not converge (relative residual " + std::to_string(state.final_residual()) +
                         ")");
  }
}

}  // namespace pointflow
