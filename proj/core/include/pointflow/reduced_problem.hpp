#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "pointflow/adjoint.hpp"
#include "pointflow/controls.hpp"
#include "pointflow/ns_state.hpp"

namespace pointflow {

/// State, adjoint and derivative data of the reduced cost at one control.
struct Evaluation {
  ControlVector u;
  StateSolution state;
  double cost = 0.0;
  std::optional<AdjointSolution> adjoint;
  GradientVector gradient;  // empty unless the adjoint was solved
};

/// j(U) = 1/2 ||y(U) - y_Omega||^2 + eta/2 sum_t |u_t|^2 and its derivatives.
class ReducedProblem {
 public:
  ReducedProblem(std::shared_ptr<const NavierStokesModel> model, TrackingTarget target, double eta,
                 StateSolveOptions opts = {});

  const NavierStokesModel& model() const { return *model_; }
  const TrackingTarget& target() const { return target_; }
  double eta() const { return eta_; }
  const StateSolveOptions& state_options() const { return opts_; }
  int dim() const { return model_->num_controls(); }

  /// Throws NonConvergence when the state solve fails. A warm start seeds
  /// Newton with its state.
  Evaluation evaluate(const ControlVector& u, bool with_gradient = true, const Evaluation* warm_start = nullptr) const;
  /// Adds the adjoint and gradient to an evaluation made without them.
  void add_gradient(Evaluation& ev) const;

  double reduced_cost(const ControlVector& u) const;
  GradientVector reduced_gradient(const ControlVector& u) const;

  /// j''(U) V^2 = ||theta||^2 - 2 c(theta, theta, z) + eta |V|^2 with
  /// theta = Q'(U) V. Equal to the divergence form below whenever theta is
  /// pointwise divergence free.
  double hessian_quadratic_form(const Evaluation& at, const ControlVector& v) const;
  double hessian_quadratic_form(const ControlVector& u, const ControlVector& v) const;

  /// ||theta||^2 + 2 int theta (x) theta : grad z + eta |V|^2, kept as a
  /// diagnostic of the integration-by-parts gap.
  double hessian_tensor_form(const Evaluation& at, const ControlVector& v) const;

  /// H_ij = theta_i^T M theta_j - (T_ij + T_ji) + eta delta_ij with
  /// T_ij = c(theta_i, theta_j, z), one linearized solve per control
  /// component against the shared factorization.
  Eigen::MatrixXd assemble_reduced_hessian(const Evaluation& at) const;
  Eigen::MatrixXd assemble_reduced_hessian(const ControlVector& u) const;

  /// theta = Q'(U) V at an evaluated point.
  FlowField sensitivity(const Evaluation& at, const ControlVector& v) const;

 private:
  const AdjointSolution& adjoint_of(const Evaluation& at) const;

  std::shared_ptr<const NavierStokesModel> model_;
  TrackingTarget target_;
  double eta_;
  StateSolveOptions opts_;
};

}  // namespace pointflow
