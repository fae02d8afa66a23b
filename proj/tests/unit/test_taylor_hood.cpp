#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pointflow/errors.hpp"
#include "pointflow/taylor_hood.hpp"

namespace pointflow {
namespace {

TEST(TaylorHoodSpace, DofCounts) {
  const auto space = testing::unit_space(4);
  const auto& m = space->mesh();
  EXPECT_EQ(space->n_u(), 2 * (m.num_nodes() + m.num_edges()));
  EXPECT_EQ(space->n_p(), m.num_nodes());
}

TEST(TaylorHoodSpace, BoundaryDofsAreExactlyThoseOnTheBoundary) {
  const auto space = testing::graded_space(5, {{0.31, 0.62}}, 2);
  int expected = 0;
  for (int s = 0; s < space->n_scalar(); ++s) {
    const Vec2 x = space->dof_point(s);
    const bool on = x.x() == 0.0 || x.x() == 1.0 || x.y() == 0.0 || x.y() == 1.0;
    for (int c = 0; c < 2; ++c) EXPECT_EQ(space->is_boundary_velocity_dof(TaylorHoodSpace::vdof(s, c)), on);
    expected += on ? 2 : 0;
  }
  EXPECT_EQ(static_cast<int>(space->boundary_velocity_dofs().size()), expected);
}

TEST(P2Basis, PartitionOfUnityAndLagrangeProperty) {
  const std::array<std::array<double, 3>, 6> nodes = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                                        {0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}}};
  for (int i = 0; i < 6; ++i) {
    const auto v = P2Basis::values(nodes[i]);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(v[j], i == j ? 1.0 : 0.0, 1e-15);
  }
  const auto v = P2Basis::values({0.2, 0.3, 0.5});
  double s = 0.0;
  for (double x : v) s += x;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Evaluation, ReproducesLinearsAndQuadratics) {
  const auto space = testing::graded_space(4, {{0.5, 0.5}}, 1);
  const auto lin = interpolate_velocity(*space, [](const Vec2& x) { return x; });
  const Vec2 a = evaluate_velocity_at(*space, lin, {0.3, 0.7});
  EXPECT_NEAR(a.x(), 0.3, 1e-14);
  EXPECT_NEAR(a.y(), 0.7, 1e-14);
  const auto quad = interpolate_velocity(*space, [](const Vec2& x) { return Vec2(x.x() * x.x(), 0.0); });
  const Vec2 b = evaluate_velocity_at(*space, quad, {0.5, 0.5});
  EXPECT_NEAR(b.x(), 0.25, 1e-14);
  EXPECT_NEAR(b.y(), 0.0, 1e-14);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    const Vec2 x(u(rng), u(rng));
    EXPECT_NEAR(evaluate_velocity_at(*space, quad, x).x(), x.x() * x.x(), 1e-14);
  }
}

TEST(Evaluation, VertexValueEqualsStoredDof) {
  const auto space = testing::unit_space(4);
  std::mt19937_64 rng(4);
  const Eigen::VectorXd v = testing::random_interior_velocity(*space, rng);
  for (int s = 0; s < space->mesh().num_nodes(); ++s) {
    const Vec2 val = evaluate_velocity_at(*space, v, space->mesh().nodes()[s]);
    EXPECT_NEAR(val.x(), v[TaylorHoodSpace::vdof(s, 0)], 1e-15);
    EXPECT_NEAR(val.y(), v[TaylorHoodSpace::vdof(s, 1)], 1e-15);
  }
}

TEST(Evaluation, OutsideDomainIsNotFound) {
  const auto space = testing::unit_space(3);
  const FlowField f = zero_field(space, FieldRole::state);
  EXPECT_THROW(f.velocity_at({1.5, 0.5}), NotFound);
}

TEST(Evaluation, GradientOfQuadraticIsExact) {
  const auto space = testing::unit_space(3);
  const auto v = interpolate_velocity(*space, [](const Vec2& x) { return Vec2(x.x() * x.y(), x.y() * x.y()); });
  for (int k = 0; k < space->mesh().num_triangles(); ++k) {
    const auto g = space->geometry(k);
    Vec2 val;
    Mat2 grad;
    velocity_on_cell(*space, v, k, {0.2, 0.5, 0.3}, g, val, grad);
    const Vec2 x = g.map({0.2, 0.5, 0.3});
    EXPECT_NEAR(grad(0, 0), x.y(), 1e-13);
    EXPECT_NEAR(grad(0, 1), x.x(), 1e-13);
    EXPECT_NEAR(grad(1, 0), 0.0, 1e-13);
    EXPECT_NEAR(grad(1, 1), 2 * x.y(), 1e-13);
  }
}

}  // namespace
}  // namespace pointflow
