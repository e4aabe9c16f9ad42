#include <doctest.h>

#include <cmath>
#include <random>

#include "mfschrod/errors.hpp"
#include "mfschrod/experiments.hpp"
#include "mfschrod/levelset.hpp"

using namespace mfs;

namespace {
const ScalarFn kZeroV = [](double) { return 0.0; };
}

TEST_SUITE_BEGIN("levelset");

TEST_CASE("ls_init sets f = n0 and phi = p - dS0/dx") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 2.0, 16), -2.0, 2.0, 8);
  RandomSample z;

  WkbData flat{[](double, const RandomSample&) { return 1.0; },
               [](double, const RandomSample&) { return 0.0; },
               [](double, const RandomSample&) { return 0.0; }};
  LevelSetState s = ls_init(flat, z, grid);
  for (int j = 0; j < 16; ++j)
    for (int k = 0; k < 8; ++k) {
      CHECK(s.fat(j, k) == 1.0);
      CHECK(s.phiat(j, k) == doctest::Approx(grid.p_node(k)).epsilon(1e-14));
    }

  WkbData linear{[](double, const RandomSample&) { return 1.0; },
                 [](double x, const RandomSample&) { return x; },
                 [](double, const RandomSample&) { return 1.0; }};
  s = ls_init(linear, z, grid);
  for (int j = 0; j < 16; ++j)
    for (int k = 0; k < 8; ++k)
      CHECK(s.phiat(j, k) ==
            doctest::Approx(grid.p_node(k) - 1.0).epsilon(1e-14));
}

TEST_CASE("ls_init without an analytic gradient falls back to spectral") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 2.0, 64), -2.0, 2.0, 8);
  RandomSample z;
  WkbData data{[](double, const RandomSample&) { return 1.0; },
               [](double x, const RandomSample&) { return std::sin(M_PI * x); },
               nullptr};
  const LevelSetState s = ls_init(data, z, grid);
  for (int j = 0; j < 64; j += 7) {
    const double expected =
        grid.p_node(3) - M_PI * std::cos(M_PI * grid.xgrid.node(j));
    CHECK(s.phiat(j, 3) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("zero level set brackets the phase gradient for soliton-style data") {
  const double eps = 1.0 / 64.0;
  const ProblemSpec p = make_problem(ProblemId::test1, eps, 5);
  RandomSample z;
  z.z.assign(p.dim, 0.0);
  const PhaseGrid grid =
      make_phase_grid(make_grid(p.a, p.b, 200), -2.0, 2.0, 40);
  const LevelSetState s = ls_init(p.wkb, z, grid);
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> pick(0, 199);
  for (int t = 0; t < 10; ++t) {
    const int j = pick(gen);
    const double target = p.wkb.s0_x(grid.xgrid.node(j), z);
    bool bracketed = false;
    for (int k = 0; k + 1 < 40; ++k) {
      if (s.phiat(j, k) <= 0.0 && s.phiat(j, k + 1) >= 0.0) {
        bracketed = true;
        CHECK(grid.p_node(k) <= target + 1e-12);
        CHECK(grid.p_node(k + 1) >= target - 1e-12);
        break;
      }
    }
    CHECK(bracketed);
  }
}

TEST_CASE("cfl_timestep hand values") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 2.0, 200), -2.0, 2.0, 40);
  CHECK(cfl_timestep(grid, kZeroV, 1.0) ==
        doctest::Approx(0.01 / 4.0).epsilon(1e-14));
  CHECK(cfl_timestep(grid, kZeroV, 0.5) ==
        doctest::Approx(0.5 * 0.01 / 4.0).epsilon(1e-14));

  // zero advection everywhere: bound collapses to safety * min(dx, dp)
  const PhaseGrid tiny = make_phase_grid(make_grid(0.0, 1.0, 10), 0.0, 0.0 + 0.4, 4);
  // p nodes 0,0.1,0.2,0.3 -> max |p| = 0.3 nonzero; build a true zero-speed grid
  const PhaseGrid zero_speed =
      make_phase_grid(make_grid(0.0, 1.0, 10), -0.15, 0.25, 4);
  // p nodes: -0.15,-0.05,0.05,0.15
  CHECK(cfl_timestep(zero_speed, kZeroV, 1.0) ==
        doctest::Approx(0.1 / (2.0 * 0.15)).epsilon(1e-12));
  (void)tiny;

  const PhaseGrid harm =
      make_phase_grid(make_grid(-M_PI, M_PI, 100), -2.0, 2.0, 40);
  const ScalarFn v1 = [](double x) { return x; };  // max |V'| = pi > 2
  const double expected = std::min(2.0 * M_PI / 100.0, 0.1) / (2.0 * M_PI);
  CHECK(cfl_timestep(harm, v1, 1.0) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("constant-coefficient transport matches the shifted profile") {
  const SpatialGrid1D xg = make_grid(0.0, 2.0, 200);
  const PhaseGrid grid = make_phase_grid(xg, -2.0, 2.0, 8);
  RandomSample z;
  auto g0 = [](double x) {
    return std::exp(std::sin(M_PI * x));  // smooth periodic profile
  };
  WkbData data{[&](double x, const RandomSample&) { return g0(x); },
               [](double, const RandomSample&) { return 0.0; },
               [](double, const RandomSample&) { return 0.0; }};
  LevelSetState s = ls_init(data, z, grid);
  const double T = 0.1;
  const double dt = T / 50;  // well under the CFL bound 0.0025
  const LevelSetState out = ls_solve(s, kZeroV, dt, T);
  for (int k = 0; k < grid.np; ++k) {
    const double speed = grid.p_node(k);
    double linf = 0.0;
    for (int j = 0; j < xg.n; ++j) {
      const double exact = g0(xg.node(j) - speed * T);
      linf = std::max(linf, std::abs(out.fat(j, k) - exact));
    }
    CHECK(linf <= 1e-3);
  }
}

TEST_CASE("t_final = 0 is a no-op and constants are preserved") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 1.0, 32), -1.0, 1.0, 8);
  RandomSample z;
  WkbData data{[](double, const RandomSample&) { return 0.7; },
               [](double x, const RandomSample&) { return 0.3 * x; },
               [](double, const RandomSample&) { return 0.3; }};
  const LevelSetState s = ls_init(data, z, grid);
  const LevelSetState same = ls_solve(s, kZeroV, 1e-3, 0.0);
  CHECK(same.f == s.f);

  const LevelSetState run = ls_solve(s, kZeroV, 1e-3, 0.05);
  for (double v : run.f) CHECK(std::abs(v - 0.7) <= 1e-12);
}

TEST_CASE("CFL violation is rejected before stepping") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 1.0, 100), -2.0, 2.0, 8);
  RandomSample z;
  WkbData data{[](double, const RandomSample&) { return 1.0; },
               [](double, const RandomSample&) { return 0.0; },
               [](double, const RandomSample&) { return 0.0; }};
  const LevelSetState s = ls_init(data, z, grid);
  CHECK_THROWS_WITH_AS(ls_solve(s, kZeroV, 0.01, 0.1),
                       doctest::Contains("CFL"), NumericError);
}

TEST_CASE("advection stays within the initial bounds up to 1e-6") {
  const SpatialGrid1D xg = make_grid(0.0, 2.0, 128);
  const PhaseGrid grid = make_phase_grid(xg, -2.0, 2.0, 4);
  RandomSample z;
  auto g0 = [](double x) { return 1.0 + 0.5 * std::sin(M_PI * x); };
  WkbData data{[&](double x, const RandomSample&) { return g0(x); },
               [](double, const RandomSample&) { return 0.0; },
               [](double, const RandomSample&) { return 0.0; }};
  const LevelSetState s = ls_init(data, z, grid);
  const LevelSetState out = ls_solve(s, kZeroV, 2e-3, 0.2);
  for (double v : out.f) {
    CHECK(v <= 1.5 + 1e-6);
    CHECK(v >= 0.5 - 1e-6);
  }
}

TEST_CASE("delta kernel point values and support") {
  CHECK(delta_kernel({DeltaKernelKind::cosine, 0.1}, 0.0) ==
        doctest::Approx(10.0).epsilon(1e-14));
  CHECK(delta_kernel({DeltaKernelKind::cosine, 0.1}, 0.15) == 0.0);
  CHECK(delta_kernel({DeltaKernelKind::piecewise_linear, 0.2}, 0.15) ==
        doctest::Approx((1.0 - 0.75) / 0.2).epsilon(1e-14));
  CHECK(delta_kernel({DeltaKernelKind::piecewise_linear, 0.2}, -0.25) == 0.0);
}

TEST_CASE("exact integration property for both kernels") {
  const SpatialGrid1D g = make_grid(0.0, 2.0, 200);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> unif(0.3, 1.7);
  for (int kappa0 : {1, 2, 3, 4}) {
    const double eta = kappa0 * g.h;
    for (auto kind :
         {DeltaKernelKind::piecewise_linear, DeltaKernelKind::cosine}) {
      const DeltaKernelSpec spec{kind, eta};
      for (int trial = 0; trial < 100; ++trial) {
        const double x0 = unif(gen);
        double sum = 0.0;
        for (int j = 0; j < g.n; ++j)
          sum += delta_kernel(spec, g.node(j) - x0) * g.h;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("moments with unit density recover the exact integrals") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 1.0, 10), -2.0, 2.0, 40);
  LevelSetState s;
  s.grid = grid;
  s.f.assign(10 * 40, 1.0);
  s.phi.resize(10 * 40);
  const DeltaKernelSpec spec{DeltaKernelKind::cosine, 2 * grid.dp};

  // phi = p: concentration at p = 0 (a grid node)
  for (int j = 0; j < 10; ++j)
    for (int k = 0; k < 40; ++k) s.phiat(j, k) = grid.p_node(k);
  ObservablePair obs = ls_observables(s, spec);
  for (int j = 0; j < 10; ++j) {
    CHECK(std::abs(obs.rho[j] - 1.0) <= 1e-12);
    CHECK(std::abs(obs.current[j]) <= 1e-12);
  }

  // phi = p - 1 with 1 on the p grid
  for (int j = 0; j < 10; ++j)
    for (int k = 0; k < 40; ++k) s.phiat(j, k) = grid.p_node(k) - 1.0;
  obs = ls_observables(s, spec);
  for (int j = 0; j < 10; ++j) {
    CHECK(std::abs(obs.rho[j] - 1.0) <= 1e-10);
    CHECK(std::abs(obs.current[j] - 1.0) <= 1e-10);
  }
}

TEST_CASE("eta must be an integer multiple of dp") {
  const PhaseGrid grid =
      make_phase_grid(make_grid(0.0, 1.0, 10), -2.0, 2.0, 40);
  LevelSetState s;
  s.grid = grid;
  s.f.assign(10 * 40, 1.0);
  s.phi.assign(10 * 40, 0.0);
  CHECK_THROWS_AS(
      ls_observables(s, {DeltaKernelKind::cosine, 1.7 * grid.dp}),
      NumericError);
}

TEST_SUITE_END();
