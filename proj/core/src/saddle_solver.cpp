#include "pointflow/saddle_solver.hpp"

#include <cmath>
#include <string>

#include "pointflow/errors.hpp"

namespace pointflow {

SparseMatrix build_saddle_matrix(const TaylorHoodSpace& space, const SaddleSystem& system,
                                 const SparseMatrix* convection) {
  const int nu = space.n_u();
  const int np = space.n_p();
  const int n = nu + np + 1;
  if (system.A.rows() != nu || system.B.rows() != np || system.B.cols() != nu) {
    throw InvalidArgument("build_saddle_matrix: system blocks do not match the space");
  }
  if (convection && (convection->rows() != nu || convection->cols() != nu)) {
    throw InvalidArgument("build_saddle_matrix: linearization block has the wrong size");
  }
  SparseMatrix K = system.A;
  if (convection) K += *convection;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(K.nonZeros() + 2 * system.B.nonZeros() + 2 * np + nu));
  for (int col = 0; col < K.outerSize(); ++col) {
    if (space.is_boundary_velocity_dof(col)) continue;
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      if (space.is_boundary_velocity_dof(static_cast<int>(it.row()))) continue;
      t.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  }
  for (int i : space.boundary_velocity_dofs()) t.emplace_back(i, i, 1.0);
  for (int col = 0; col < system.B.outerSize(); ++col) {
    if (space.is_boundary_velocity_dof(col)) continue;
    for (SparseMatrix::InnerIterator it(system.B, col); it; ++it) {
      const int p = nu + static_cast<int>(it.row());
      t.emplace_back(p, col, it.value());
      t.emplace_back(col, p, it.value());
    }
  }
  for (int q = 0; q < np; ++q) {
    t.emplace_back(nu + q, n - 1, system.mean_weights[q]);
    t.emplace_back(n - 1, nu + q, system.mean_weights[q]);
  }
  SparseMatrix S(n, n);
  S.setFromTriplets(t.begin(), t.end());
  S.makeCompressed();
  return S;
}

SaddleOperator::SaddleOperator(std::shared_ptr<const TaylorHoodSpace> space, const SaddleSystem& system,
                               const SparseMatrix* convection)
    : space_(std::move(space)), matrix_(build_saddle_matrix(*space_, system, convection)) {
  lu_.analyzePattern(matrix_);
  lu_.factorize(matrix_);
  if (lu_.info() != Eigen::Success) {
    throw SingularSystem("saddle factorization failed: " + lu_.lastErrorMessage(), 0.0);
  }
}

Eigen::VectorXd SaddleOperator::embed_velocity_rhs(const Eigen::VectorXd& rhs_u) const {
  if (rhs_u.size() != space_->n_u()) throw InvalidArgument("saddle solve: velocity rhs has the wrong size");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
  b.head(space_->n_u()) = rhs_u;
  for (int i : space_->boundary_velocity_dofs()) b[i] = 0.0;
  return b;
}

FlowField SaddleOperator::split(const Eigen::VectorXd& x, FieldRole role) const {
  FlowField f;
  f.space = space_;
  f.velocity = x.head(space_->n_u());
  f.pressure = x.segment(space_->n_u(), space_->n_p());
  f.role = role;
  return f;
}

Eigen::VectorXd SaddleOperator::solve_full(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_.solve(rhs);
  if (!x.allFinite()) throw SingularSystem("saddle solve produced non-finite values", 0.0);
  return x;
}

Eigen::VectorXd SaddleOperator::solve_full_transpose(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_.transpose().solve(rhs);
  if (!x.allFinite()) throw SingularSystem("transposed saddle solve produced non-finite values", 0.0);
  return x;
}

FlowField SaddleOperator::solve(const Eigen::VectorXd& rhs_u, FieldRole role) const {
  return split(solve_full(embed_velocity_rhs(rhs_u)), role);
}

FlowField SaddleOperator::solve_transpose(const Eigen::VectorXd& rhs_u, FieldRole role) const {
  return split(solve_full_transpose(embed_velocity_rhs(rhs_u)), role);
}

double SaddleOperator::rcond() const {
  std::call_once(rcond_once_, [this] { rcond_ = estimate_rcond(Eigen::VectorXd::Ones(size()), Eigen::VectorXd::Ones(size()));
  });
  return rcond_;
}

double SaddleOperator::scaled_rcond(const Eigen::VectorXd& row_scale, const Eigen::VectorXd& col_scale) const {
  if (row_scale.size() != size() || col_scale.size() != size()) {
    throw InvalidArgument("scaled_rcond: scaling vectors have the wrong size");
  }
  if (!(row_scale.array() > 0.0).all() || !(col_scale.array() > 0.0).all()) {
    throw InvalidArgument("scaled_rcond: scaling must be positive");
  }
  return estimate_rcond(row_scale, col_scale);
}

double SaddleOperator::estimate_rcond(const Eigen::VectorXd& r, const Eigen::VectorXd& c) const {
  const int n = size();
  double norm1 = 0.0;
  for (int col = 0; col < matrix_.outerSize(); ++col) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(matrix_, col); it; ++it) s += std::abs(r[it.row()] * it.value());
    norm1 = std::max(norm1, c[col] * s);
  }
  // inverse of R S C is C^{-1} S^{-1} R^{-1}
  auto solve_full = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return this->solve_full(v.cwiseQuotient(r)).cwiseQuotient(c);
  };
  auto solve_full_transpose = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return this->solve_full_transpose(v.cwiseQuotient(c)).cwiseQuotient(r);
  };

  // Hager's estimator for ||S^{-1}||_1 with Higham's alternating-sign check.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double est = 0.0;
  int last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = solve_full(x);
    const double new_est = y.lpNorm<1>();
    if (iter > 0 && new_est <= est) break;
    est = new_est;
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    const Eigen::VectorXd z = solve_full_transpose(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (iter > 0 && (zmax <= z.dot(x) || static_cast<int>(j) == last_j)) break;
    last_j = static_cast<int>(j);
    x.setZero();
    x[j] = 1.0;
  }
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / std::max(1, n - 1));
  est = std::max(est, 2.0 * solve_full(b).lpNorm<1>() / (3.0 * n));

  return (est > 0.0 && norm1 > 0.0) ? 1.0 / (norm1 * est) : 0.0;
}

FlowField solve_saddle(std::shared_ptr<const TaylorHoodSpace> space, const SaddleSystem& system,
                       const SparseMatrix* convection, const Eigen::VectorXd& rhs_u, FieldRole role) {
  SaddleOperator op(std::move(space), system, convection);
  return op.solve(rhs_u, role);
}

}  // namespace pointflow
