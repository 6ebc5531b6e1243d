#include <benchmark/benchmark.h>

#include "pbergman/confmap.hpp"
#include "pbergman/numerics.hpp"

using namespace pbergman;

namespace {

void BM_GaussLegendre(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gauss_legendre(n));
}
BENCHMARK(BM_GaussLegendre)->RangeMultiplier(4)->Range(8, 512);

void BM_SolveZigzag(benchmark::State& state) {
  const PeriodicCellSpec spec = zigzag_cell(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sc_parameters(spec));
}
BENCHMARK(BM_SolveZigzag)->Unit(benchmark::kMillisecond);

void BM_ZigzagLift(benchmark::State& state) {
  const PeriodicCellSpec spec = zigzag_cell(0.5);
  const auto map = make_sc_map(spec, solve_sc_parameters(spec));
  const cplx z(0.3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(map->lift_point(z));
}
BENCHMARK(BM_ZigzagLift)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
