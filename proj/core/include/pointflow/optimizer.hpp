#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "pointflow/controls.hpp"
#include "pointflow/reduced_problem.hpp"

namespace pointflow {

struct OptimizeOptions {
  double tol = 1e-8;            // stop when vi_residual <= tol
  int max_iters = 500;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 30;
  bool barzilai_borwein = true;  // BB trial step after the first iteration
};

struct OptimizeIterate {
  ControlVector u;
  double cost = 0.0;
  double vi_residual = 0.0;
  double step = 0.0;
};

struct OptimizeReport {
  std::vector<OptimizeIterate> iterates;  // accepted points, starting with U0
  ControlVector u;
  double cost = 0.0;
  GradientVector gradient;
  double vi_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  int backtracks = 0;
  int failed_state_solves = 0;
  std::string message;
};

/// U+ = P(U - s Psi) with Armijo backtracking on j; trial steps whose state
/// solve fails are halved like rejected ones.
OptimizeReport projected_gradient(const ReducedProblem& problem, const ControlVector& u0, const BoxConstraints& box,
                                  const OptimizeOptions& opts = {});

struct SscOptions {
  double tau = 1e-6;
  double tol_active = 1e-8;
  double kappa_min = 1e-10;
  double stationarity_tol = 1e-8;
  double active_rel_tol = 1e-10;
};

struct SecondOrderReport {
  Eigen::MatrixXd hessian;
  GradientVector gradient;
  double vi_residual = 0.0;
  std::vector<BoundState> bound_state;
  CriticalCone cone;      // C_U (threshold tol_active)
  CriticalCone tau_cone;  // C_U^tau
  double tau = 0.0;
  bool ssc_holds = false;
  double kappa = std::numeric_limits<double>::infinity();  // +inf when tau_cone = {0}
  Eigen::VectorXd kappa_direction;
  double necessary_min = std::numeric_limits<double>::infinity();  // min over C_U
  bool necessary_holds = false;  // necessary_min >= -1e-8 ||H||
};

/// Second-order check at a stationary point; InvalidArgument when
/// vi_residual exceeds opts.stationarity_tol.
SecondOrderReport check_ssc(const ReducedProblem& problem, const ControlVector& u, const BoxConstraints& box,
                            const SscOptions& opts = {});

struct GrowthReport {
  double mu = 0.0;                 // largest mu >= 0 with growth at all samples
  double min_ratio = 0.0;          // min of 2 (j(U_s) - j(U)) / |U_s - U|^2
  int samples = 0;
  int violations = 0;              // samples with j(U_s) < j(U)
  std::vector<double> ratios;
};

/// Samples feasible controls in the ball of radius sigma around U (projected
/// onto the box) and fits the quadratic growth constant.
GrowthReport quadratic_growth_probe(const ReducedProblem& problem, const ControlVector& u, const BoxConstraints& box,
                                    double sigma, int samples, std::uint64_t seed);

}  // namespace pointflow
