// Microbenchmarks for the solver kernels and the offline selection.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mfschrod/experiments.hpp"
#include "mfschrod/fga.hpp"
#include "mfschrod/fourier.hpp"
#include "mfschrod/levelset.hpp"
#include "mfschrod/multifidelity.hpp"
#include "mfschrod/observables.hpp"
#include "mfschrod/parallel.hpp"
#include "mfschrod/rng.hpp"
#include "mfschrod/tsfp.hpp"

using namespace mfs;

namespace {

WaveField beam_field(double eps, int n) {
  const ProblemSpec p = make_problem(ProblemId::test2a, eps, 5);
  RandomSample z;
  z.z.assign(p.dim, 0.0);
  return wkb_initial(p.wkb, z, eps, make_grid(p.a, p.b, n));
}

void BM_TsfpStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double eps = 1.0 / 32.0;
  WaveField f = beam_field(eps, n);
  const PotentialFn v = [](double x, const RandomSample&) { return 0.5 * x * x; };
  for (auto _ : state) {
    f = tsfp_step(f, v, {}, 1e-4);
    benchmark::DoNotOptimize(f.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TsfpStep)->Arg(512)->Arg(2048)->Arg(3840);

void BM_SpectralDerivative(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const WaveField f = beam_field(1.0 / 32.0, n);
  for (auto _ : state) {
    auto d = spectral_derivative(f.grid, f.values);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_SpectralDerivative)->Arg(512)->Arg(3840);

void BM_FgaDecompose(benchmark::State& state) {
  const double eps = 1.0 / 32.0;
  const ProblemSpec p = make_problem(ProblemId::test2a, eps, 5);
  const WaveField f = beam_field(eps, 768);
  const PhaseSpaceBox box{p.meshes.fga.q_min, p.meshes.fga.q_max,
                          p.meshes.fga.p_min, p.meshes.fga.p_max};
  for (auto _ : state) {
    auto ens = fga_decompose(f, box, p.meshes.fga.nq, p.meshes.fga.np, 1e-3);
    benchmark::DoNotOptimize(ens.particles.data());
  }
}
BENCHMARK(BM_FgaDecompose);

void BM_FgaEvolve(benchmark::State& state) {
  const double eps = 1.0 / 32.0;
  const ProblemSpec p = make_problem(ProblemId::test2a, eps, 5);
  const WaveField f = beam_field(eps, 768);
  const PhaseSpaceBox box{p.meshes.fga.q_min, p.meshes.fga.q_max,
                          p.meshes.fga.p_min, p.meshes.fga.p_max};
  const FGAEnsemble ens = fga_decompose(f, box, p.meshes.fga.nq,
                                        p.meshes.fga.np, 1e-3);
  auto v0 = [](double x) { return 0.5 * x * x; };
  auto v1 = [](double x) { return x; };
  auto v2 = [](double) { return 1.0; };
  for (auto _ : state) {
    auto out = fga_evolve(ens, v0, v1, v2, 1e-2, 0.1);
    benchmark::DoNotOptimize(out.particles.data());
  }
  state.SetItemsProcessed(state.iterations() * ens.particles.size() * 10);
}
BENCHMARK(BM_FgaEvolve);

void BM_FgaReconstruct(benchmark::State& state) {
  const double eps = 1.0 / 32.0;
  const ProblemSpec p = make_problem(ProblemId::test2a, eps, 5);
  const WaveField f = beam_field(eps, 768);
  const PhaseSpaceBox box{p.meshes.fga.q_min, p.meshes.fga.q_max,
                          p.meshes.fga.p_min, p.meshes.fga.p_max};
  const FGAEnsemble ens = fga_decompose(f, box, p.meshes.fga.nq,
                                        p.meshes.fga.np, 1e-3);
  const SpatialGrid1D grid = make_grid(p.a, p.b, 384);
  for (auto _ : state) {
    auto rec = fga_reconstruct(ens, grid);
    benchmark::DoNotOptimize(rec.values.data());
  }
}
BENCHMARK(BM_FgaReconstruct);

void BM_LsStep(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 2.0, nx), -2.0, 2.0, 40);
  RandomSample z;
  WkbData data{
      [](double x, const RandomSample&) {
        return std::exp(-100.0 * (x - 1.0) * (x - 1.0));
      },
      [](double x, const RandomSample&) { return -x; },
      [](double, const RandomSample&) { return -1.0; }};
  const LevelSetState s0 = ls_init(data, z, grid);
  const ScalarFn v1 = [](double) { return 0.0; };
  const double dt = cfl_timestep(grid, v1, 0.9);
  for (auto _ : state) {
    auto s1 = ls_solve(s0, v1, dt, dt);
    benchmark::DoNotOptimize(s1.f.data());
  }
  state.SetItemsProcessed(state.iterations() * nx * 40);
}
BENCHMARK(BM_LsStep)->Arg(200)->Arg(768);

void BM_GreedySelect(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SnapshotMatrix snap;
  snap.ip_weight = 0.01;
  snap.samples.resize(m);
  snap.columns.assign(m, std::vector<double>(256));
  for (auto& c : snap.columns)
    for (auto& v : c) v = unif(gen);
  for (auto _ : state) {
    auto sel = greedy_select(snap, 25, 1e-12);
    benchmark::DoNotOptimize(sel.indices.data());
  }
}
BENCHMARK(BM_GreedySelect)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
