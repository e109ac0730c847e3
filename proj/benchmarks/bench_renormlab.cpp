#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "renormlab/commutator.hpp"
#include "renormlab/flow.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parabolic.hpp"
#include "renormlab/presets.hpp"
#include "renormlab/spectral.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Grid grid_for(const benchmark::State& state) { return build_grid(int(state.range(0)), kTwoPi, int(state.range(1))); }

GridScalar smooth_scalar(const Grid& g) {
  return GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]) + 0.5 * std::sin(x[1] + x[0]); });
}

}  // namespace

static void BM_Convolve(benchmark::State& state) {
  const Grid g = grid_for(state);
  const GridScalar f = smooth_scalar(g);
  const MollifierKernel k = mollifier(g, g.length / 16.0);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(f, k));
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}
BENCHMARK(BM_Convolve)->Args({1, 64})->Args({1, 1024})->Args({2, 64});

static void BM_Gradient(benchmark::State& state) {
  const Grid g = grid_for(state);
  const GridScalar f = smooth_scalar(g);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(f));
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}
BENCHMARK(BM_Gradient)->Args({1, 64})->Args({2, 64});

static void BM_CommutatorT(benchmark::State& state) {
  const Grid g = grid_for(state);
  const GridVector sigma = diffusion_preset("trig", g, 1.0).front().slice(0);
  const GridScalar f = smooth_scalar(g);
  for (auto _ : state) benchmark::DoNotOptimize(op_T(sigma, f, g.length / 16.0));
}
BENCHMARK(BM_CommutatorT)->Args({1, 64})->Args({2, 64});

static void BM_CommutatorS(benchmark::State& state) {
  const Grid g = grid_for(state);
  const GridVector sigma = diffusion_preset("trig", g, 1.0).front().slice(0);
  const GridScalar f = smooth_scalar(g);
  for (auto _ : state) benchmark::DoNotOptimize(op_S(sigma, f, g.length / 16.0));
}
BENCHMARK(BM_CommutatorS)->Args({1, 64})->Args({2, 64});

static void BM_MildSolve(benchmark::State& state) {
  const Grid g = grid_for(state);
  const TimeGridVector b = drift_preset("trig", g, 0.5);
  MildSolveOptions opts;
  opts.quad_steps = int(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(mild_solve(b, 16.0, opts));
}
BENCHMARK(BM_MildSolve)->Args({1, 64, 512})->Args({2, 32, 128})->Unit(benchmark::kMillisecond);

static void BM_SimulateMember(benchmark::State& state) {
  const Grid g = grid_for(state);
  const TimeGridVector b = drift_preset("trig", g, 0.1);
  const auto s = diffusion_preset("trig", g, 0.1);
  std::uint64_t member = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_member(b, s, SdeConfig{1e-3, 1, 1}, member++));
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()) * 100);
}
BENCHMARK(BM_SimulateMember)->Args({1, 64})->Args({2, 32})->Unit(benchmark::kMillisecond);

static void BM_InvertFlow(benchmark::State& state) {
  const Grid g = grid_for(state);
  const FlowEnsemble e = simulate_member(drift_preset("trig", g, 0.1), diffusion_preset("trig", g, 0.1), SdeConfig{1e-3, 1, 1}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(invert_flow(e, e.steps));
}
BENCHMARK(BM_InvertFlow)->Args({1, 64})->Args({2, 32})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
