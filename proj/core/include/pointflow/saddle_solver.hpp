#pragma once

#include <memory>
#include <mutex>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pointflow/assembly.hpp"

namespace pointflow {

/// Factorized constrained saddle-point matrix
///
///   [ A + C   B^T   0 ] [u]   [f]
///   [ B       0     m ] [p] = [0]
///   [ 0       m^T   0 ] [l]   [0]
///
/// where C is an optional linearization block and m the pressure mean
/// weights (the scalar multiplier l pins the zero-mean gauge). Rows and columns
/// of boundary velocity dofs are replaced by the identity, so the matrix of
/// the transposed problem is exactly the transpose of this one.
class SaddleOperator {
 public:
  SaddleOperator(std::shared_ptr<const TaylorHoodSpace> space, const SaddleSystem& system,
                 const SparseMatrix* convection = nullptr);

  SaddleOperator(const SaddleOperator&) = delete;
  SaddleOperator& operator=(const SaddleOperator&) = delete;

  const SparseMatrix& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  const TaylorHoodSpace& space() const { return *space_; }

  /// Solves with velocity right-hand side `rhs_u` (boundary entries ignored).
  FlowField solve(const Eigen::VectorXd& rhs_u, FieldRole role) const;
  /// Solves the transposed system.
  FlowField solve_transpose(const Eigen::VectorXd& rhs_u, FieldRole role) const;

  /// Raw solves on full-length vectors.
  Eigen::VectorXd solve_full(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_full_transpose(const Eigen::VectorXd& rhs) const;

  /// Reciprocal 1-norm condition estimate (Hager-Higham), computed on demand
  /// and cached.
  double rcond() const;
  /// Same estimate for diag(row_scale) * S * diag(col_scale), reusing the
  /// factorization.
  double scaled_rcond(const Eigen::VectorXd& row_scale, const Eigen::VectorXd& col_scale) const;

  /// Embeds a velocity vector into a full-length right-hand side, zeroing
  /// boundary entries.
  Eigen::VectorXd embed_velocity_rhs(const Eigen::VectorXd& rhs_u) const;
  FlowField split(const Eigen::VectorXd& x, FieldRole role) const;

 private:
  double estimate_rcond(const Eigen::VectorXd& row_scale, const Eigen::VectorXd& col_scale) const;

  std::shared_ptr<const TaylorHoodSpace> space_;
  SparseMatrix matrix_;
  // Eigen's transpose view is non-const although solving through it is not.
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  mutable std::once_flag rcond_once_;
  mutable double rcond_ = 0.0;
};

/// One-shot solve of the saddle system with optional linearization block.
FlowField solve_saddle(std::shared_ptr<const TaylorHoodSpace> space, const SaddleSystem& system,
                       const SparseMatrix* convection, const Eigen::VectorXd& rhs_u, FieldRole role);

/// Builds the constrained saddle matrix without factorizing it.
SparseMatrix build_saddle_matrix(const TaylorHoodSpace& space, const SaddleSystem& system,
                                 const SparseMatrix* convection);

}  // namespace pointflow
