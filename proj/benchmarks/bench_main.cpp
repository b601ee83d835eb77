#include <benchmark/benchmark.h>

#include <random>

#include "amest/sim.hpp"

using namespace amest;

namespace {

GeneralizedState sample_state() {
  GeneralizedState s;
  s.q << 0.3, -0.2, 0.7, 0.1, -0.15, 0.4, -1.2, 0.3;
  s.qd << 0.5, -0.4, 0.1, 0.2, 0.3, -0.1, 0.8, -0.6;
  return s;
}

void BM_DecomposeDynamics(benchmark::State& st) {
  const GeneralizedState s = sample_state();
  const ModelConstants consts;
  for (auto _ : st) benchmark::DoNotOptimize(decompose_dynamics(s, consts));
}
BENCHMARK(BM_DecomposeDynamics);

void BM_SynthesizeDynamics(benchmark::State& st) {
  const GeneralizedState s = sample_state();
  const ModelConstants consts;
  const UnknownParams xi = UnknownParams::from_mass_and_com(0.5, 0.16);
  for (auto _ : st) benchmark::DoNotOptimize(synthesize_dynamics(s, consts, xi));
}
BENCHMARK(BM_SynthesizeDynamics);

void BM_SimulationStep(benchmark::State& st) {
  const Scenario sc;
  const SimState start = initial_state(sc);
  std::mt19937_64 rng(sc.seed);
  for (auto _ : st) benchmark::DoNotOptimize(step(sc, start, 0.0, rng));
}
BENCHMARK(BM_SimulationStep);

void BM_OneSecondRun(benchmark::State& st) {
  Scenario sc;
  sc.duration = 1.0;
  sc.controller = static_cast<ControllerKind>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run(sc));
}
BENCHMARK(BM_OneSecondRun)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
