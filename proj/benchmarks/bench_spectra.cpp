#include <benchmark/benchmark.h>

#include "cqed/coupling.hpp"
#include "cqed/spectra.hpp"

namespace {

using namespace cqed;

void BM_TransmonLevels(benchmark::State& state) {
  SolverOptions opts;
  opts.basis = static_cast<int>(state.range(0));
  opts.check_convergence = false;
  const TransmonParams p{190.0, 50 * 190.0, 0.25};
  for (auto _ : state) benchmark::DoNotOptimize(transmon_levels(p, opts));
}
BENCHMARK(BM_TransmonLevels)->Arg(15)->Arg(30)->Arg(60);

void BM_TransmonLevelsChecked(benchmark::State& state) {
  const TransmonParams p{190.0, 50 * 190.0, 0.25};
  for (auto _ : state) benchmark::DoNotOptimize(transmon_levels(p, SolverOptions{}));
}
BENCHMARK(BM_TransmonLevelsChecked);

void BM_GatemonLevels(benchmark::State& state) {
  SolverOptions opts;
  opts.basis = static_cast<int>(state.range(0));
  opts.check_convergence = false;
  const GatemonParams p{190.0, 1000 * 190.0, {0.3}, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(gatemon_levels(p, opts));
}
BENCHMARK(BM_GatemonLevels)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMicrosecond);

void BM_InferTransmission(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(infer_transmission(-172.0, 190.0, 1000 * 190.0));
}
BENCHMARK(BM_InferTransmission)->Unit(benchmark::kMillisecond);

void BM_GateSweep(benchmark::State& state) {
  const GateSweepModel ramp({0.0, 10.0}, {0.0, 30000.0}, SweepQuantity::JosephsonEnergy);
  const SweepSystem sys{5.2816, 100.0, 190.0, 0.0, 0.0, 0};
  const auto v = linspace(0.0, 10.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gate_sweep(ramp, v, sys));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GateSweep)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace
