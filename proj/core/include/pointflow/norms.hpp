#pragma once

#include <functional>

#include <Eigen/Core>

#include "pointflow/taylor_hood.hpp"
#include "pointflow/weights.hpp"

namespace pointflow {

using GradientField = std::function<Mat2(const Vec2&)>;

/// (int |grad v|^2 rho^sign)^(1/2) for a P2 velocity v, sign in {+1, -1}.
///
/// Elements away from the sources use a rule of degree `degree`; elements with
/// a vertex at a source use a rule of degree max(degree, 6). Every rule point
/// is strictly interior, so rho^-1 stays finite at all samples.
double weighted_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity,
                         const MuckenhouptWeight& w, int sign, int degree = 4);

/// (int |grad v|^p)^(1/p) for p in (1, 2).
double lp_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, double p,
                   int degree = 6);

/// Unweighted H1 seminorm and L2 norm of a P2 velocity.
double h1_seminorm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity);
double l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity);

/// Errors against an exact velocity and its gradient (row c = grad of
/// component c).
double l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const VectorField& exact,
                int degree = 10);
double h1_error(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const GradientField& exact,
                int degree = 10);

/// int |f|^2 by quadrature.
double l2_norm_squared(const TaylorHoodSpace& space, const VectorField& f, int degree = 10);

}  // namespace pointflow
