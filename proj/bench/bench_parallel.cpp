// Parallel kernels vs. their serial references.
#include <benchmark/benchmark.h>

#include "wlelm/harness.hpp"

using namespace wlelm;

namespace {

struct LayerInputs {
  ComplexMatrix Z, W;
  ComplexVector b;
};

LayerInputs layer_inputs(Eigen::Index n, Eigen::Index L) {
  Rng rng(5);
  LayerInputs in{ComplexMatrix(n, 3), ComplexMatrix(L, 3), ComplexVector(L)};
  for (auto& v : in.Z.reshaped()) v = rng.complex_normal(1.0);
  for (auto& v : in.W.reshaped()) v = rng.complex_normal(0.01);
  for (auto& v : in.b) v = rng.complex_normal(0.01);
  return in;
}

void BM_HiddenLayer(benchmark::State& state) {
  const auto in = layer_inputs(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(hidden_layer(in.Z, in.W, in.b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HiddenLayerSerial(benchmark::State& state) {
  const auto in = layer_inputs(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(hidden_layer_serial(in.Z, in.W, in.b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

ExperimentConfig sweep_config() {
  auto cfg = default_experiment();
  cfg.sweep_values = {0, 10};
  cfg.n_frames = 4;
  return cfg;
}

void BM_Sweep(benchmark::State& state) {
  const auto cfg = sweep_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, static_cast<int>(state.range(0))));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cfg = sweep_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(cfg));
}

}  // namespace

BENCHMARK(BM_HiddenLayer)->Arg(1024)->Arg(16384)->Arg(262144);
BENCHMARK(BM_HiddenLayerSerial)->Arg(1024)->Arg(16384)->Arg(262144);
BENCHMARK(BM_Sweep)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
