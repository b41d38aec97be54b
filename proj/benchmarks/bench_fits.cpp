#include <benchmark/benchmark.h>

#include <numbers>

#include "cqed/lineshape.hpp"
#include "cqed/rabi.hpp"
#include "cqed/resonator.hpp"
#include "cqed/synth.hpp"

namespace {

using namespace cqed;

ComplexTrace reference_trace(int points, double delay_ns) {
  ReflectionSynthSpec s;
  s.truth.a = {0.8, 0.3};
  s.truth.ql = 6740.0;
  s.truth.qc = 7360.0;
  s.truth.f_r_ghz = 5.443;
  s.truth.delay_ns = delay_ns;
  s.freq_ghz = reflection_window(s.truth, 5.0, points);
  s.snr_db = 30.0;
  s.seed = 1;
  return synth_reflection(s);
}

void BM_FitReflection(benchmark::State& state) {
  const auto trace = reference_trace(static_cast<int>(state.range(0)), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_reflection(trace));
}
BENCHMARK(BM_FitReflection)->Arg(401)->Arg(1601)->Unit(benchmark::kMicrosecond);

void BM_FitReflectionWithDelay(benchmark::State& state) {
  const auto trace = reference_trace(1601, 0.8);
  ReflectionFitOptions opt;
  opt.fit_delay = true;
  for (auto _ : state) benchmark::DoNotOptimize(fit_reflection(trace, std::nullopt, opt));
}
BENCHMARK(BM_FitReflectionWithDelay)->Unit(benchmark::kMicrosecond);

void BM_FitLorentzian(benchmark::State& state) {
  LineshapeSynthSpec s;
  s.truth = LorentzianParams{4.5, 0.021, 0.3, 1.0};
  s.freq_ghz = Axis{4.4, 4.6, 201};
  s.snr_db = 20.0;
  s.seed = 1;
  const auto data = synth_lineshape(s);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lorentzian(data));
}
BENCHMARK(BM_FitLorentzian)->Unit(benchmark::kMicrosecond);

void BM_FitRabi(benchmark::State& state) {
  RabiSynthSpec s;
  s.truth = RabiParams{1.0, 260.0, 2.0 * std::numbers::pi / 60.0, 0.3, 2e-4, 0.5};
  s.t_ns = Axis{0.0, 1000.0, 201};
  s.snr_db = 20.0;
  s.seed = 1;
  const auto data = synth_rabi(s);
  for (auto _ : state) benchmark::DoNotOptimize(fit_rabi(data));
}
BENCHMARK(BM_FitRabi)->Unit(benchmark::kMicrosecond);

void BM_SynthReflection(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(reference_trace(1601, 0.0));
}
BENCHMARK(BM_SynthReflection)->Unit(benchmark::kMicrosecond);

}  // namespace
