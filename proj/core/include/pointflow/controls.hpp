#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "pointflow/geometry.hpp"

namespace pointflow {

/// Control amplitudes (u_1, ..., u_l) stored flat: entry 2t + c is component c
/// of u_t. Gradients Psi use the same layout.
using ControlVector = Eigen::VectorXd;
using GradientVector = Eigen::VectorXd;

inline Vec2 control_at(const ControlVector& u, int t) { return {u[2 * t], u[2 * t + 1]}; }
std::vector<Vec2> control_pairs(const ControlVector& u);

/// Componentwise box a <= u <= b with a < b.
class BoxConstraints {
 public:
  BoxConstraints(Eigen::VectorXd lower, Eigen::VectorXd upper);
  /// The same bounds [a, b] for every scalar component of l sources.
  static BoxConstraints uniform(int sources, double a, double b);

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  int dim() const { return static_cast<int>(lower_.size()); }
  bool contains(const ControlVector& u) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

ControlVector project_box(const ControlVector& v, const BoxConstraints& box);

/// || U - P(U - Psi) ||_2, zero exactly at points satisfying the variational
/// inequality.
double vi_residual(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box);

enum class BoundState { inactive, lower, upper };

/// Component i is active when within rel_tol * (b_i - a_i) of a bound.
std::vector<BoundState> bound_states(const ControlVector& u, const BoxConstraints& box, double rel_tol = 1e-10);

struct KktSignReport {
  std::vector<BoundState> state;
  std::vector<bool> violated;
  int violations = 0;
};

/// Lower-active components need Psi >= -tol, upper-active Psi <= tol,
/// inactive |Psi| <= tol.
KktSignReport kkt_sign_report(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box,
                              double tol);

enum class ConeConstraint { free, zero, nonnegative, nonpositive };

struct CriticalCone {
  std::vector<ConeConstraint> constraint;
  /// Components with |Psi| above the threshold (forced to zero).
  std::vector<bool> strongly_active;
  double threshold = 0.0;

  int dim() const { return static_cast<int>(constraint.size()); }
  bool is_trivial() const;
  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const;
};

/// Components with |Psi_i| > threshold are fixed to zero; remaining components
/// at a lower (upper) bound are restricted to v_i >= 0 (v_i <= 0); all others
/// are free. threshold = tol_active gives the numerical version of C_U,
/// threshold = tau the cone C_U^tau.
CriticalCone critical_cone(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box,
                           double threshold, double active_rel_tol = 1e-10);

struct ConeMinimum {
  double value = std::numeric_limits<double>::infinity();  // +inf when the cone is {0}
  Eigen::VectorXd direction;                                // unit vector attaining the value
};

/// min of v^T H v / |v|^2 over the nonzero directions of the cone. Enumerates
/// which sign-restricted components vanish; on each face the minimizer is an
/// eigenvector of the restricted matrix lying in the face.
ConeMinimum cone_min_rayleigh(const Eigen::MatrixXd& h, const CriticalCone& cone);

}  // namespace pointflow
