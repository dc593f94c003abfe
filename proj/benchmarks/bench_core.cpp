#include <benchmark/benchmark.h>

#include <random>

#include "nsv/analysis.hpp"
#include "nsv/fields.hpp"
#include "nsv/galerkin.hpp"

using namespace nsv;

namespace {

Scenario scenario(int n_modes, int grid) {
  Scenario sc;
  sc.params.p = 1.5;
  sc.params.q = 6.0;
  sc.params.alpha = 0.1;
  sc.n_modes = n_modes;
  sc.grid = grid;
  sc.dt = 1e-3;
  sc.T = 1e-3;
  sc.ic.energy = 1.0;
  sc.noise = {NoiseFamily::linear, 0.5, 8};
  return sc;
}

void BM_ForwardInverseFft(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  GridScalar g(n);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (auto& v : g.v) v = nd(rng);
  for (auto _ : st) benchmark::DoNotOptimize(inverse(forward(g)));
}
BENCHMARK(BM_ForwardInverseFft)->Arg(32)->Arg(64)->Arg(128);

void BM_EvaluateDrift(benchmark::State& st) {
  const Scenario sc = scenario(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  auto pb = make_problem(sc);
  const GalerkinState s = initial_state(sc, pb);
  const SpectralField u = s.field();
  for (auto _ : st)
    benchmark::DoNotOptimize(evaluate_drift(pb->basis, u, pb->forcing_at(0), sc.params, sc.noise, true));
}
BENCHMARK(BM_EvaluateDrift)->Args({64, 32})->Args({128, 64})->Args({200, 64});

void BM_Step(benchmark::State& st) {
  const Scenario sc = scenario(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  auto pb = make_problem(sc);
  GalerkinState s = initial_state(sc, pb);
  for (auto _ : st) s = step(s);
}
BENCHMARK(BM_Step)->Args({64, 32})->Args({128, 64})->Args({200, 64});

}  // namespace

BENCHMARK_MAIN();
