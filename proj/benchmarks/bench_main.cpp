#include <benchmark/benchmark.h>

#include "tgmfe/fespace.hpp"
#include "tgmfe/msolve.hpp"
#include "tgmfe/problems.hpp"

using namespace tgmfe;

namespace {

SpacePtr unit_square(int n) { return make_space(make_uniform_mesh(Domain{Interval{0, 1}, Interval{0, 1}}, n)); }

void BM_AssembleStiffness(benchmark::State& state) {
  const auto s = unit_square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(*s));
}
BENCHMARK(BM_AssembleStiffness)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AssembleWeightedMass(benchmark::State& state) {
  const auto s = unit_square(static_cast<int>(state.range(0)));
  const QpField w = qp_values(*s, [](const Point& x) { return 1.0 + x[0] * x[1]; });
  for (auto _ : state) benchmark::DoNotOptimize(assemble_weighted_mass(*s, w));
}
BENCHMARK(BM_AssembleWeightedMass)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FactorizeStiffness(benchmark::State& state) {
  const auto s = unit_square(static_cast<int>(state.range(0)));
  const SparseMatrix a = restrict_to_free(*s, assemble_stiffness(*s));
  for (auto _ : state) {
    DirectSolver solver;
    solver.factorize(a);
    benchmark::DoNotOptimize(solver.symmetric_path());
  }
}
BENCHMARK(BM_FactorizeStiffness)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// One nonlinear or two-grid fine step on the example42 data.
void step_bench(benchmark::State& state, Method m) {
  const int n = static_cast<int>(state.range(0));
  const ProblemSpec p = example42(1.0);
  const SolverConfig cfg;
  const Discretization fine(unit_square(n), p);
  const ThetaScheme sch(0.2, 1.0 / n, 2);
  const StepState s1 = mfe_step(init_state(fine, cfg), sch, fine, cfg);
  if (m == Method::Mfe) {
    for (auto _ : state) benchmark::DoNotOptimize(mfe_step(s1, sch, fine, cfg));
  } else {
    const Discretization coarse(unit_square(std::max(2, n / 8)), p);
    const CoarseTrajectory traj = tg_coarse_run(coarse, sch, cfg);
    const CrossMeshMap map(fine.space(), coarse.space_ptr());
    for (auto _ : state) benchmark::DoNotOptimize(tg_fine_step(s1, traj.u[2], map, sch, fine, cfg));
  }
}

void BM_MfeStep(benchmark::State& state) { step_bench(state, Method::Mfe); }
void BM_TgFineStep(benchmark::State& state) { step_bench(state, Method::Tgmfe); }
BENCHMARK(BM_MfeStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TgFineStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
