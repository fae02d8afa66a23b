#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pointflow/errors.hpp"
#include "pointflow/norms.hpp"
#include "pointflow/saddle_solver.hpp"

namespace pointflow {
namespace {

class SaddleTest : public ::testing::Test {
 protected:
  std::shared_ptr<const TaylorHoodSpace> space = testing::graded_space(6, {{0.4, 0.55}}, 2);
  SaddleSystem sys = assemble_stokes(*space, 1.0);
  std::mt19937_64 rng{17};
};

TEST_F(SaddleTest, ZeroRhsGivesZeroField) {
  const auto f = solve_saddle(space, sys, nullptr, Eigen::VectorXd::Zero(space->n_u()), FieldRole::state);
  EXPECT_EQ(f.velocity.norm(), 0.0);
  EXPECT_EQ(f.pressure.norm(), 0.0);
}

TEST_F(SaddleTest, ResidualBoundaryAndGauge) {
  const SaddleOperator op(space, sys);
  const Eigen::VectorXd f = testing::random_interior_velocity(*space, rng);
  const Eigen::VectorXd rhs = op.embed_velocity_rhs(f);
  const Eigen::VectorXd x = op.solve_full(rhs);
  EXPECT_LE((op.matrix() * x - rhs).norm(), 1e-10 * rhs.norm());
  const auto field = op.split(x, FieldRole::state);
  for (int i : space->boundary_velocity_dofs()) EXPECT_EQ(field.velocity[i], 0.0);
  EXPECT_LE(std::abs(sys.mean_weights.dot(field.pressure)), 1e-12 * field.pressure.norm());
  // Discrete momentum equation on interior test functions.
  Eigen::VectorXd r = sys.A * field.velocity + sys.B.transpose() * field.pressure - f;
  for (int i : space->boundary_velocity_dofs()) r[i] = 0.0;
  EXPECT_LE(r.norm(), 1e-10 * f.norm());
  EXPECT_LE((sys.B * field.velocity).norm(), 1e-10 * f.norm());
}

TEST_F(SaddleTest, StokesSolveIsSelfAdjoint) {
  const SaddleOperator op(space, sys);
  const Eigen::VectorXd f = testing::random_interior_velocity(*space, rng);
  const Eigen::VectorXd g = testing::random_interior_velocity(*space, rng);
  const double a = g.dot(op.solve(f, FieldRole::state).velocity);
  const double b = f.dot(op.solve(g, FieldRole::state).velocity);
  EXPECT_LE(testing::relative_error(a, b), 1e-10);
}

TEST_F(SaddleTest, TransposeSolveMatchesTransposeIdentity) {
  const Eigen::VectorXd y = testing::random_interior_velocity(*space, rng);
  const auto blocks = assemble_convection(*space, y);
  const SparseMatrix C = blocks.C1 + blocks.C2;
  const SaddleOperator op(space, sys, &C);
  for (int s = 0; s < 3; ++s) {
    const Eigen::VectorXd f = testing::random_interior_velocity(*space, rng);
    const Eigen::VectorXd g = testing::random_interior_velocity(*space, rng);
    const double a = g.dot(op.solve(f, FieldRole::sensitivity).velocity);
    const double b = f.dot(op.solve_transpose(g, FieldRole::adjoint).velocity);
    EXPECT_LE(testing::relative_error(a, b), 1e-10);
  }
  // The matrix itself is unchanged by the transposition path.
  const SparseMatrix St = op.matrix().transpose();
  EXPECT_GT((op.matrix() - St).norm(), 0.0);
}

TEST_F(SaddleTest, ConditionEstimateIsPositiveAndBoundedByOne) {
  const SaddleOperator op(space, sys);
  const double r = op.rcond();
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
  EXPECT_EQ(op.rcond(), r);
}

TEST_F(SaddleTest, ConditionEstimateAgreesWithDenseCondition) {
  const auto small = testing::unit_space(3);
  const auto s = assemble_stokes(*small, 1.0);
  const SaddleOperator op(small, s);
  const Eigen::MatrixXd D(op.matrix());
  const Eigen::MatrixXd Dinv = D.inverse();
  const double exact = 1.0 / (D.cwiseAbs().colwise().sum().maxCoeff() * Dinv.cwiseAbs().colwise().sum().maxCoeff());
  // Hager's estimate is a lower bound for the inverse norm, usually tight.
  EXPECT_GE(op.rcond(), exact * (1 - 1e-12));
  EXPECT_LE(op.rcond(), 10.0 * exact);
}

TEST_F(SaddleTest, SingularMatrixIsReported) {
  SaddleSystem broken = sys;
  broken.A.setZero();
  try {
    SaddleOperator op(space, broken);
    const Eigen::VectorXd x = op.solve_full(op.embed_velocity_rhs(testing::random_interior_velocity(*space, rng)));
    FAIL() << "singular system accepted";
  } catch (const SingularSystem& e) {
    EXPECT_EQ(e.rcond(), 0.0);
  }
}

double stokes_h1_error(int n, double* l2) {
  const testing::Manufactured mms;
  const auto space = testing::unit_space(n);
  const auto sys = assemble_stokes(*space, mms.nu);
  const auto F = assemble_body_load(*space, [&](const Vec2& x) { return mms.forcing(x, false); });
  const auto f = solve_saddle(space, sys, nullptr, F, FieldRole::state);
  if (l2) *l2 = l2_error(*space, f.velocity, [&](const Vec2& x) { return mms.u(x); });
  return h1_error(*space, f.velocity, [&](const Vec2& x) { return mms.grad(x); });
}

TEST(StokesManufactured, SecondOrderInH1ThirdInL2) {
  std::vector<double> h1, l2;
  for (int n : {8, 16, 32}) {
    double e = 0.0;
    h1.push_back(stokes_h1_error(n, &e));
    l2.push_back(e);
  }
  for (int i = 0; i + 1 < 3; ++i) {
    EXPECT_GE(std::log2(h1[i] / h1[i + 1]), 1.8);
    EXPECT_GE(std::log2(l2[i] / l2[i + 1]), 2.7);
  }
}

}  // namespace
}  // namespace pointflow
