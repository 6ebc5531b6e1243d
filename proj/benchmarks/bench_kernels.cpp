#include <benchmark/benchmark.h>

#include "pbergman/floquet.hpp"
#include "pbergman/kernels.hpp"

using namespace pbergman;

namespace {

const KernelContext& strip() {
  static const KernelContext ctx(builtin_strip_map(0.5));
  return ctx;
}

void BM_KernelClosed(benchmark::State& state) {
  const auto& ctx = strip();
  const cplx z(0.3, 0.1), w(1.7, -0.2);
  for (auto _ : state) benchmark::DoNotOptimize(periodic_kernel_closed(ctx, z, w));
}
BENCHMARK(BM_KernelClosed);

void BM_KernelEtaAssembly(benchmark::State& state) {
  const auto& ctx = strip();
  const cplx z(0.3, 0.1), w(1.7, -0.2);
  for (auto _ : state) benchmark::DoNotOptimize(periodic_kernel_eta_assembly(ctx, z, w));
}
BENCHMARK(BM_KernelEtaAssembly)->Unit(benchmark::kMillisecond);

void BM_KernelLineIntegral(benchmark::State& state) {
  const auto& ctx = strip();
  const cplx z(0.3, 0.1), w(1.7, -0.2);
  for (auto _ : state) benchmark::DoNotOptimize(periodic_kernel_t_integral(ctx, z, w));
}
BENCHMARK(BM_KernelLineIntegral)->Unit(benchmark::kMicrosecond);

void BM_CellKernelSeries(benchmark::State& state) {
  const auto& ctx = strip();
  const CellKernelEvaluator K(1.0, ctx.log_rho(), ctx.series);
  const LiftPoint lz = ctx.lift_at(cplx(0.3, 0.1)), lw = ctx.lift_at(cplx(0.7, -0.2));
  for (auto _ : state) benchmark::DoNotOptimize(K(lz, lw));
}
BENCHMARK(BM_CellKernelSeries);

void BM_FloquetForward(benchmark::State& state) {
  const SampledFunction f{[](cplx z) { return std::exp(-z * z); }, static_cast<int>(state.range(0)), "gaussian"};
  ForwardOptions opt;
  opt.order = 16;
  opt.n_eta = 64;
  for (auto _ : state) benchmark::DoNotOptimize(floquet_forward(f, strip().region, std::nullopt, opt));
}
BENCHMARK(BM_FloquetForward)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
