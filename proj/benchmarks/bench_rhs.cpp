#include <benchmark/benchmark.h>

#include "ddl/solver.hpp"

namespace {

ddl::SolveParams burgers_params() {
  ddl::SolveParams p;
  p.epsilon = 0.01;
  p.delta = 1e-5;
  p.flux = ddl::burgers_flux();
  return p;
}

void BM_Rhs(benchmark::State& state) {
  const auto grid = ddl::make_grid(1, 4.0, static_cast<int>(state.range(0)));
  const auto u = ddl::smoothed_riemann_data(1.0, 0.0, 0.02, 1.0, 2.0)(grid);
  const auto p = burgers_params();
  for (auto _ : state) benchmark::DoNotOptimize(ddl::rhs(u, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rhs)->RangeMultiplier(4)->Range(256, 16384);

void BM_StepRk4(benchmark::State& state) {
  const auto grid = ddl::make_grid(1, 4.0, static_cast<int>(state.range(0)));
  const auto u = ddl::smoothed_riemann_data(1.0, 0.0, 0.02, 1.0, 2.0)(grid);
  const auto p = burgers_params();
  for (auto _ : state) benchmark::DoNotOptimize(ddl::step_rk4(u, 1e-5, p));
}
BENCHMARK(BM_StepRk4)->RangeMultiplier(4)->Range(256, 16384);

void BM_Rhs2D(benchmark::State& state) {
  const auto grid = ddl::make_grid(2, 1.0, static_cast<int>(state.range(0)));
  const auto u = ddl::bump_data({0.5, 0.5}, 0.25)(grid);
  auto p = burgers_params();
  p.flux = ddl::burgers_flux(2);
  p.diffusion = ddl::linear_diffusion(2);
  for (auto _ : state) benchmark::DoNotOptimize(ddl::rhs(u, p));
}
BENCHMARK(BM_Rhs2D)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
