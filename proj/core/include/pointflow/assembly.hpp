#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pointflow/taylor_hood.hpp"
#include "pointflow/weights.hpp"

namespace pointflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Linear blocks of the discrete Stokes operator.
///
///   A = nu * vector Laplacian stiffness          (n_u x n_u)
///   B_{q,i} = -int psi_q div phi_i               (n_p x n_u)
///   M = velocity mass matrix                     (n_u x n_u)
///   mean_weights_q = int psi_q                   (pressure gauge row)
///
/// Nothing here knows about boundary conditions; the saddle solver applies
/// them.
struct SaddleSystem {
  double nu = 1.0;
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix M;
  Eigen::VectorXd mean_weights;
};

SaddleSystem assemble_stokes(const TaylorHoodSpace& space, double nu);

/// C1(y) theta ~ (y . grad) theta and C2(y) theta ~ (theta . grad) y, both
/// tested against the velocity basis.
struct ConvectionBlocks {
  SparseMatrix C1;
  SparseMatrix C2;
};

ConvectionBlocks assemble_convection(const TaylorHoodSpace& space, const Eigen::VectorXd& y);
ConvectionBlocks assemble_convection(const TaylorHoodSpace& space, const FlowField& y);

/// F_i = sum_t u_t . phi_i(t). For a source at a mesh vertex only the two
/// dofs collocated there are touched.
Eigen::VectorXd assemble_dirac_load(const TaylorHoodSpace& space, const DiracSourceSet& sources,
                                    std::span<const Vec2> amplitudes);

/// F_i = int f . phi_i.
Eigen::VectorXd assemble_body_load(const TaylorHoodSpace& space, const VectorField& f, int degree = 10);

/// v_i = int ((a . grad) b) . phi_i for velocity coefficient vectors a, b.
Eigen::VectorXd assemble_trilinear(const TaylorHoodSpace& space, const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b);

/// T_ij = int ((theta_i . grad) theta_j) . z, in one pass over the mesh.
Eigen::MatrixXd convective_gram(const TaylorHoodSpace& space, std::span<const Eigen::VectorXd> thetas,
                                const Eigen::VectorXd& z);

/// int (theta (x) theta) : grad z, the divergence form of -c(theta, theta, z).
double tensor_form_curvature(const TaylorHoodSpace& space, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& z);

}  // namespace pointflow
