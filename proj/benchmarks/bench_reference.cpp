#include <benchmark/benchmark.h>

#include "ddl/reference.hpp"
#include "ddl/solver.hpp"

namespace {

void BM_EngquistOsherStep(benchmark::State& state) {
  const auto grid = ddl::make_grid(1, 4.0, static_cast<int>(state.range(0)));
  const auto u = ddl::smoothed_riemann_data(1.0, 0.0, 0.02, 1.0, 2.0)(grid);
  const auto flux = ddl::burgers_flux();
  const double dt = ddl::reference_dt(u, flux);
  for (auto _ : state) benchmark::DoNotOptimize(ddl::reference_step(u, dt, flux));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EngquistOsherStep)->RangeMultiplier(4)->Range(512, 32768);

void BM_EngquistOsherFlux(benchmark::State& state) {
  const ddl::EngquistOsher eo(ddl::burgers_flux(), {-1.0, 1.0});
  double a = -0.9, acc = 0.0;
  for (auto _ : state) {
    acc += eo(a, -a);
    a = a > 0.9 ? -0.9 : a + 1e-3;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_EngquistOsherFlux);

void BM_ReferenceSolve(benchmark::State& state) {
  const auto grid = ddl::make_grid(1, 4.0, static_cast<int>(state.range(0)));
  const auto u = ddl::smoothed_riemann_data(1.0, 0.0, 0.02, 1.0, 2.0)(grid);
  for (auto _ : state) benchmark::DoNotOptimize(ddl::reference_solve(u, ddl::burgers_flux(), 0.5));
}
BENCHMARK(BM_ReferenceSolve)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
