#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "pointflow/assembly.hpp"
#include "pointflow/geometry.hpp"
#include "pointflow/ns_state.hpp"
#include "pointflow/reduced_problem.hpp"
#include "pointflow/saddle_solver.hpp"

using namespace pointflow;

namespace {

const std::vector<Vec2> kSources = {{0.35, 0.4}, {0.7, 0.6}};

std::shared_ptr<const TaylorHoodSpace> graded(int n) {
  return std::make_shared<const TaylorHoodSpace>(
      std::make_shared<const TriMesh>(grade_toward_points(build_unit_square_mesh(n), kSources, 1, 0.5)));
}

std::shared_ptr<const NavierStokesModel> model(int n, double nu) {
  auto space = graded(n);
  return std::make_shared<const NavierStokesModel>(space, nu, DiracSourceSet(kSources, space->mesh().domain()));
}

Vec2 vortex(const Vec2& x) {
  const double s = std::sin(M_PI * x.x()), c = std::sin(M_PI * x.y());
  return {s * s * std::sin(2 * M_PI * x.y()), -c * c * std::sin(2 * M_PI * x.x())};
}

const ControlVector kControl = (ControlVector(4) << 0.6, -0.3, -0.4, 0.5).finished();

}  // namespace

static void BM_GradeMesh(benchmark::State& state) {
  const auto base = build_unit_square_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grade_toward_points(base, kSources, 2, 0.5));
}
BENCHMARK(BM_GradeMesh)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_AssembleStokes(benchmark::State& state) {
  const auto space = graded(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stokes(*space, 1.0));
  state.counters["velocity_dofs"] = space->n_u();
}
BENCHMARK(BM_AssembleStokes)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_AssembleConvection(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)), 0.1);
  const auto y = m->solve_state(kControl).field;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_convection(m->space(), y));
}
BENCHMARK(BM_AssembleConvection)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_FactorizeStokes(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) SaddleOperator op(m->space_ptr(), m->system());
}
BENCHMARK(BM_FactorizeStokes)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SolveState(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(m->solve_state(kControl));
}
BENCHMARK(BM_SolveState)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_WarmStartedStateSolve(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)), 0.1);
  const auto start = m->solve_state(kControl);
  const ControlVector nearby = kControl + ControlVector::Constant(4, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(m->solve_state(nearby, {}, &start.field));
}
BENCHMARK(BM_WarmStartedStateSolve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_RegularityIndicator(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)), 0.1);
  const auto st = m->solve_state(kControl);
  for (auto _ : state) benchmark::DoNotOptimize(regularity_indicator(st));
}
BENCHMARK(BM_RegularityIndicator)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_ReducedHessian(benchmark::State& state) {
  const ReducedProblem p(model(static_cast<int>(state.range(0)), 0.1), TrackingTarget::analytic(vortex), 1e-3);
  const Evaluation ev = p.evaluate(kControl);
  for (auto _ : state) benchmark::DoNotOptimize(p.assemble_reduced_hessian(ev));
}
BENCHMARK(BM_ReducedHessian)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
