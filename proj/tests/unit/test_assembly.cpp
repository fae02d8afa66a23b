#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pointflow/assembly.hpp"
#include "pointflow/errors.hpp"

namespace pointflow {
namespace {

using testing::refined_integral;

Eigen::VectorXd interior_only(const TaylorHoodSpace& space, Eigen::VectorXd v) {
  for (int i : space.boundary_velocity_dofs()) v[i] = 0.0;
  return v;
}

TEST(Stokes, RejectsNonpositiveViscosity) {
  const auto space = testing::unit_space(2);
  EXPECT_THROW(assemble_stokes(*space, 0.0), InvalidArgument);
  EXPECT_THROW(assemble_stokes(*space, -1.0), InvalidArgument);
}

TEST(Stokes, ConstantFieldIsInKernel) {
  const auto space = testing::graded_space(4, {{0.4, 0.6}}, 2);
  const auto sys = assemble_stokes(*space, 2.0);
  const auto c = interpolate_velocity(*space, [](const Vec2&) { return Vec2(1.5, -0.5); });
  EXPECT_LE(interior_only(*space, sys.A * c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Stokes, EnergyOfQuadraticMatchesAnalyticIntegral) {
  const double nu = 0.7;
  const auto space = testing::graded_space(5, {{0.4, 0.6}}, 2);
  const auto sys = assemble_stokes(*space, nu);
  const auto u = interpolate_velocity(*space, [](const Vec2& x) { return Vec2(x.y() * x.y(), 0.0); });
  EXPECT_NEAR(u.dot(sys.A * u), nu * 4.0 / 3.0, 1e-10);
}

TEST(Stokes, DivergenceOfDivergenceFreeQuadraticIsZero) {
  const auto space = testing::unit_space(6);
  const auto sys = assemble_stokes(*space, 1.0);
  for (const VectorField& f : {VectorField([](const Vec2& x) { return Vec2(x.y(), 0.0); }),
                               VectorField([](const Vec2& x) { return Vec2(x.x() * x.x(), -2 * x.x() * x.y()); })}) {
    EXPECT_LE((sys.B * interpolate_velocity(*space, f)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Stokes, DivergenceMatchesQuadratureOfDivergence) {
  const auto space = testing::unit_space(4);
  const auto sys = assemble_stokes(*space, 1.0);
  // Linear pressure test function q = x: -int q div u = int grad q . u on a
  // field vanishing on the boundary.
  const auto u = interpolate_velocity(*space, [](const Vec2& x) {
    return Vec2(x.x() * (1 - x.x()) * x.y() * (1 - x.y()), 0.0);
  });
  const auto q = interpolate_pressure(*space, [](const Vec2& x) { return x.x(); });
  const double oracle = refined_integral(*space, 1, 8, [&](int k, const std::array<double, 3>& l,
                                                          const ElementGeometry& g) {
    Vec2 v;
    Mat2 grad;
    velocity_on_cell(*space, u, k, l, g, v, grad);
    return v.x();
  });
  EXPECT_NEAR(q.dot(sys.B * u), oracle, 1e-14);
}

TEST(Stokes, SymmetryAndMassDefiniteness) {
  const auto space = testing::graded_space(4, {{0.4, 0.6}}, 2);
  const auto sys = assemble_stokes(*space, 1.0);
  const SparseMatrix At = sys.A.transpose();
  EXPECT_LE((sys.A - At).norm(), 1e-12 * sys.A.norm());
  const SparseMatrix Mt = sys.M.transpose();
  EXPECT_LE((sys.M - Mt).norm(), 1e-14 * sys.M.norm());
  Eigen::SimplicialLLT<SparseMatrix> llt(sys.M);
  EXPECT_EQ(llt.info(), Eigen::Success);
  const auto one = interpolate_velocity(*space, [](const Vec2&) { return Vec2(1.0, 0.0); });
  EXPECT_NEAR(one.dot(sys.M * one), 1.0, 1e-13);
  EXPECT_NEAR(sys.mean_weights.sum(), 1.0, 1e-13);
}

TEST(Stokes, AssemblyIsBitwiseReproducible) {
  const auto space = testing::graded_space(5, {{0.4, 0.6}}, 2);
  const auto a = assemble_stokes(*space, 1.0);
  const auto b = assemble_stokes(*space, 1.0);
  EXPECT_TRUE(Eigen::MatrixXd(a.A) == Eigen::MatrixXd(b.A));
  EXPECT_TRUE(Eigen::MatrixXd(a.B) == Eigen::MatrixXd(b.B));
}

// Smallest singular value of B on zero-mean pressures, in the norms
// induced by A (velocity) and the P1 mass matrix (pressure).
double inf_sup_constant(int n) {
  const auto space = testing::unit_space(n);
  const auto sys = assemble_stokes(*space, 1.0);
  std::vector<int> interior;
  for (int i = 0; i < space->n_u(); ++i)
    if (!space->is_boundary_velocity_dof(i)) interior.push_back(i);
  const int ni = static_cast<int>(interior.size());
  SparseMatrix P(space->n_u(), ni);
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j < ni; ++j) t.emplace_back(interior[j], j, 1.0);
  P.setFromTriplets(t.begin(), t.end());
  const SparseMatrix Ai = P.transpose() * sys.A * P;
  const SparseMatrix Bi = sys.B * P;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Ai);
  const Eigen::MatrixXd X = ldlt.solve(Eigen::MatrixXd(Bi.transpose()));
  const Eigen::MatrixXd S = Eigen::MatrixXd(Bi) * X;

  // P1 pressure mass matrix, assembled here independently.
  const int np = space->n_p();
  Eigen::MatrixXd Mp = Eigen::MatrixXd::Zero(np, np);
  for (int k = 0; k < space->mesh().num_triangles(); ++k) {
    const auto& tri = space->mesh().triangles()[k];
    const double area = space->mesh().signed_area(k);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) Mp(tri[a], tri[b]) += area / 12.0 * (a == b ? 2.0 : 1.0);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Mp);
  // The constant mode gives eigenvalue 0; the next one is beta^2.
  return std::sqrt(es.eigenvalues()[1]);
}

TEST(Stokes, DiscreteInfSupBoundedBelowUnderRefinement) {
  const double b8 = inf_sup_constant(8);
  const double b16 = inf_sup_constant(16);
  const double b32 = inf_sup_constant(32);
  EXPECT_GT(b8, 0.05);
  EXPECT_GE(b16 / b8, 0.5);
  EXPECT_GE(b32 / b16, 0.5);
}

TEST(Convection, ZeroAdvectionGivesZeroBlocks) {
  const auto space = testing::unit_space(3);
  const auto blocks = assemble_convection(*space, Eigen::VectorXd(Eigen::VectorXd::Zero(space->n_u())));
  EXPECT_EQ(blocks.C1.norm(), 0.0);
  EXPECT_EQ(blocks.C2.norm(), 0.0);
}

TEST(Convection, SpaceMismatchIsRejected) {
  const auto a = testing::unit_space(3);
  const auto b = testing::unit_space(4);
  EXPECT_THROW(assemble_convection(*a, zero_field(b, FieldRole::state)), InvalidArgument);
  EXPECT_THROW(assemble_convection(*a, Eigen::VectorXd(Eigen::VectorXd::Zero(5))), InvalidArgument);
}

TEST(Convection, SkewSymmetryForDivergenceFreeAdvection) {
  const auto space = testing::graded_space(6, {{0.45, 0.55}}, 2);
  // Rigid rotation, exactly divergence free; theta vanishes on the boundary.
  const auto y = interpolate_velocity(*space, [](const Vec2& x) { return Vec2(x.y() - 0.5, 0.5 - x.x()); });
  std::mt19937_64 rng(8);
  const auto blocks = assemble_convection(*space, y);
  for (int s = 0; s < 5; ++s) {
    const Eigen::VectorXd th = testing::random_interior_velocity(*space, rng);
    EXPECT_LE(std::abs(th.dot(blocks.C1 * th)), 1e-12 * th.squaredNorm());
  }
}

TEST(Convection, BlocksMatchDirectQuadrature) {
  const auto space = testing::graded_space(4, {{0.45, 0.55}}, 1);
  std::mt19937_64 rng(12);
  const Eigen::VectorXd y = testing::random_interior_velocity(*space, rng);
  const Eigen::VectorXd th = testing::random_interior_velocity(*space, rng);
  const Eigen::VectorXd w = testing::random_interior_velocity(*space, rng);
  const auto blocks = assemble_convection(*space, y);
  auto field = [&](const Eigen::VectorXd& v, int k, const std::array<double, 3>& l, const ElementGeometry& g,
                   Vec2& val, Mat2& grad) { velocity_on_cell(*space, v, k, l, g, val, grad); };
  const double c1 = refined_integral(*space, 1, 8, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 yv, tv, wv;
    Mat2 yg, tg, wg;
    field(y, k, l, g, yv, yg);
    field(th, k, l, g, tv, tg);
    field(w, k, l, g, wv, wg);
    return (tg * yv).dot(wv);
  });
  const double c2 = refined_integral(*space, 1, 8, [&](int k, const std::array<double, 3>& l, const ElementGeometry& g) {
    Vec2 yv, tv, wv;
    Mat2 yg, tg, wg;
    field(y, k, l, g, yv, yg);
    field(th, k, l, g, tv, tg);
    field(w, k, l, g, wv, wg);
    return (yg * tv).dot(wv);
  });
  EXPECT_LE(testing::relative_error(w.dot(blocks.C1 * th), c1), 1e-10);
  EXPECT_LE(testing::relative_error(w.dot(blocks.C2 * th), c2), 1e-10);
  // The trilinear vector and the Gram form use the same integrand.
  EXPECT_LE(testing::relative_error(w.dot(assemble_trilinear(*space, y, th)), c1), 1e-10);
  const std::vector<Eigen::VectorXd> thetas = {y, th};
  const Eigen::MatrixXd T = convective_gram(*space, thetas, w);
  EXPECT_LE(testing::relative_error(T(0, 1), c1), 1e-10);
}

TEST(Convection, TensorFormEqualsConvectiveFormForDivergenceFreeTheta) {
  const auto space = testing::unit_space(6);
  // Pointwise divergence-free theta, z vanishing on the boundary.
  const auto theta = interpolate_velocity(*space, [](const Vec2& x) { return Vec2(x.y() - 0.5, 0.5 - x.x()); });
  std::mt19937_64 rng(1);
  const Eigen::VectorXd z = testing::random_interior_velocity(*space, rng);
  const double conv = z.dot(assemble_trilinear(*space, theta, theta));
  EXPECT_NEAR(tensor_form_curvature(*space, theta, z), -conv, 1e-12 * std::max(1.0, std::abs(conv)));
}

TEST(DiracLoad, ZeroAndSingleEntry) {
  const std::vector<Vec2> pts = {{0.37, 0.61}};
  const auto space = testing::graded_space(4, pts, 2);
  const DiracSourceSet src(pts, space->mesh().domain());
  const std::vector<Vec2> zero = {{0.0, 0.0}};
  EXPECT_EQ(assemble_dirac_load(*space, src, zero).norm(), 0.0);
  const std::vector<Vec2> ex = {{1.0, 0.0}};
  const auto F = assemble_dirac_load(*space, src, ex);
  const int node = *space->mesh().find_node(pts[0], 1e-14);
  int nonzeros = 0;
  for (int i = 0; i < F.size(); ++i) nonzeros += F[i] != 0.0 ? 1 : 0;
  EXPECT_EQ(nonzeros, 1);
  EXPECT_EQ(F[TaylorHoodSpace::vdof(node, 0)], 1.0);
}

TEST(DiracLoad, PairingWithDiscreteFieldsIsPointEvaluation) {
  const std::vector<Vec2> pts = {{0.3, 0.3}, {0.7, 0.45}, {0.5, 0.8}};
  const auto space = testing::graded_space(5, pts, 2);
  const DiracSourceSet src(pts, space->mesh().domain());
  const std::vector<Vec2> u = {{0.3, -1.2}, {2.0, 0.1}, {-0.4, 0.9}};
  const auto F = assemble_dirac_load(*space, src, u);
  std::mt19937_64 rng(21);
  for (int s = 0; s < 10; ++s) {
    const Eigen::VectorXd v = testing::random_interior_velocity(*space, rng);
    double direct = 0.0;
    for (std::size_t t = 0; t < pts.size(); ++t) direct += u[t].dot(evaluate_velocity_at(*space, v, pts[t]));
    EXPECT_NEAR(F.dot(v), direct, 1e-14 * std::max(1.0, std::abs(direct)) * 10);
  }
}

TEST(BodyLoad, ConstantForceIntegratesBasisFunctions) {
  const auto space = testing::unit_space(3);
  const auto F = assemble_body_load(*space, [](const Vec2&) { return Vec2(1.0, 2.0); });
  const auto one = interpolate_velocity(*space, [](const Vec2&) { return Vec2(1.0, 0.0); });
  EXPECT_NEAR(F.dot(one), 1.0, 1e-14);
}

}  // namespace
}  // namespace pointflow
