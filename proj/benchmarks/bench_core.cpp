#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "conflow/flow.hpp"

using namespace conflow;

namespace {

struct Setup {
  GridPtr grid;
  Background bg;
  ScalarField u;
  FSpec f = fzoo::classical();

  explicit Setup(int points)
      : grid(make_grid_1d(4, points, 2.0 * std::numbers::pi)),
        bg(Background::from_spec(grid, "sinusoidal:-1.5,0.4,0")),
        u(ScalarField::sample(grid, [](std::span<const double> x) { return 1.0 + 0.1 * std::cos(x[0]); })) {}
};

void BM_Laplacian(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(laplacian0(s.u));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Evaluate(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(s.bg, s.u, s.f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_StableDt(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stable_dt(s.bg, s.u, s.f, 0.8));
}

void BM_Step(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const Scheme scheme = state.range(1) ? Scheme::rk4 : Scheme::euler;
  const ConformalState start{s.u, 0.0};
  const double dt = stable_dt(s.bg, s.u, s.f, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(step(s.bg, start, s.f, dt, scheme));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Laplacian)->RangeMultiplier(2)->Range(64, 1024);
BENCHMARK(BM_Evaluate)->RangeMultiplier(2)->Range(64, 1024);
BENCHMARK(BM_StableDt)->Arg(128)->Arg(1024);
BENCHMARK(BM_Step)->ArgsProduct({{128, 1024}, {0, 1}});
BENCHMARK_MAIN();
