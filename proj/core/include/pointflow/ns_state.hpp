#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pointflow/assembly.hpp"
#include "pointflow/controls.hpp"
#include "pointflow/saddle_solver.hpp"
#include "pointflow/weights.hpp"

namespace pointflow {

struct StateSolveOptions {
  int picard_iters = 3;
  double newton_tol = 1e-10;
  int newton_max_iters = 30;
  int continuation_steps = 2;
  int max_halvings = 12;
};

/// Converged (or best) discrete state together with the factorized Jacobian
/// A + C1(y) + C2(y) at the returned iterate.
struct StateSolution {
  FlowField field;
  bool converged = false;
  std::vector<double> residual_history;
  Eigen::VectorXd load;
  double nu = 1.0;
  std::shared_ptr<const SaddleOperator> jacobian;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// Steady Navier-Stokes on a fixed Taylor-Hood space with Dirac controls at
/// fixed source points.
class NavierStokesModel {
 public:
  NavierStokesModel(std::shared_ptr<const TaylorHoodSpace> space, double nu, DiracSourceSet sources);

  const TaylorHoodSpace& space() const { return *space_; }
  std::shared_ptr<const TaylorHoodSpace> space_ptr() const { return space_; }
  const SaddleSystem& system() const { return system_; }
  const DiracSourceSet& sources() const { return sources_; }
  double nu() const { return system_.nu; }
  int num_controls() const { return 2 * sources_.size(); }

  Eigen::VectorXd dirac_load(const ControlVector& u) const;

  /// With an initial guess, Newton starts from it and falls back to the
  /// Stokes/Picard start only if that fails.
  StateSolution solve_state(const ControlVector& u, const StateSolveOptions& opts = {},
                            const FlowField* initial_guess = nullptr) const;
  /// Same nonlinear solver for an arbitrary velocity load vector.
  StateSolution solve_state_with_load(const Eigen::VectorXd& load, const StateSolveOptions& opts = {},
                                      const FlowField* initial_guess = nullptr) const;

  /// Relative algebraic residual of (y, p) for the given load.
  double relative_residual(const FlowField& field, const Eigen::VectorXd& load) const;

 private:
  Eigen::VectorXd residual_full(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd pack(const FlowField& f) const;

  std::shared_ptr<const TaylorHoodSpace> space_;
  SaddleSystem system_;
  DiracSourceSet sources_;
  SparseMatrix stokes_matrix_;
  std::shared_ptr<const SaddleOperator> stokes_;
};

/// (theta, xi) solving the linearized system J theta = load at the state.
FlowField solve_linearized(const StateSolution& state, const Eigen::VectorXd& load);

/// (psi, gamma) solving J psi = -c(theta1, theta2, .) - c(theta2, theta1, .).
FlowField solve_second_sensitivity(const StateSolution& state, const FlowField& theta1, const FlowField& theta2);

/// Reciprocal condition estimate of the Jacobian at the state, with momentum
/// rows divided by nu and the pressure multiplied by nu so that the Stokes part
/// is viscosity independent.
double regularity_indicator(const StateSolution& state);

constexpr double kRegularityThreshold = 1e-12;

/// Throws NonConvergence when the state did not reach its tolerance.
void require_converged(const StateSolution& state);

}  // namespace pointflow
