#include "mfschrod/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/fourier.hpp"
#include "mfschrod/parallel.hpp"

namespace mfs {

PhaseGrid make_phase_grid(const SpatialGrid1D& xgrid, double p_min,
                          double p_max, int np) {
  if (!(p_max > p_min)) throw NumericError("phase grid: p_max must exceed p_min");
  if (np < 4) throw NumericError("phase grid: np must be >= 4");
  PhaseGrid g;
  g.xgrid = xgrid;
  g.p_min = p_min;
  g.p_max = p_max;
  g.np = np;
  g.dp = (p_max - p_min) / np;
  return g;
}

LevelSetState ls_init(const WkbData& data, const RandomSample& z,
                      const PhaseGrid& grid) {
  const int nx = grid.xgrid.n;
  const int np = grid.np;
  LevelSetState state;
  state.grid = grid;
  state.t = 0.0;
  state.f.resize(static_cast<size_t>(nx) * np);
  state.phi.resize(static_cast<size_t>(nx) * np);

  std::vector<double> grad(nx);
  if (data.s0_x) {
    for (int j = 0; j < nx; ++j) grad[j] = data.s0_x(grid.xgrid.node(j), z);
  } else {
    std::vector<double> s0(nx);
    for (int j = 0; j < nx; ++j) s0[j] = data.s0(grid.xgrid.node(j), z);
    grad = spectral_derivative_real(grid.xgrid, s0);
  }

  for (int j = 0; j < nx; ++j) {
    const double n0 = data.n0(grid.xgrid.node(j), z);
    for (int k = 0; k < np; ++k) {
      state.fat(j, k) = n0;
      state.phiat(j, k) = grid.p_node(k) - grad[j];
    }
  }
  return state;
}

double cfl_timestep(const PhaseGrid& grid, const ScalarFn& v1, double safety) {
  if (!(safety > 0.0) || safety > 1.0)
    throw NumericError("cfl_timestep: safety must lie in (0,1]");
  double max_speed = 0.0;
  for (int k = 0; k < grid.np; ++k)
    max_speed = std::max(max_speed, std::abs(grid.p_node(k)));
  for (int j = 0; j < grid.xgrid.n; ++j)
    max_speed = std::max(max_speed, std::abs(v1(grid.xgrid.node(j))));
  const double dmin = std::min(grid.xgrid.h, grid.dp);
  if (max_speed == 0.0) return safety * dmin;
  return safety * dmin / (2.0 * max_speed);
}

namespace {

constexpr double kWenoEps = 1e-6;  // smoothness-indicator regularizer

// Jiang-Peng WENO5 combination of the five one-sided differences.
inline double weno5_combine(double v1, double v2, double v3, double v4,
                            double v5) {
  const double p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
  const double p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
  const double p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
  const double s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) * (v1 - 2.0 * v2 + v3) +
                    0.25 * (v1 - 4.0 * v2 + 3.0 * v3) * (v1 - 4.0 * v2 + 3.0 * v3);
  const double s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) * (v2 - 2.0 * v3 + v4) +
                    0.25 * (v2 - v4) * (v2 - v4);
  const double s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5) * (v3 - 2.0 * v4 + v5) +
                    0.25 * (3.0 * v3 - 4.0 * v4 + v5) * (3.0 * v3 - 4.0 * v4 + v5);
  const double a1 = 0.1 / ((kWenoEps + s1) * (kWenoEps + s1));
  const double a2 = 0.6 / ((kWenoEps + s2) * (kWenoEps + s2));
  const double a3 = 0.3 / ((kWenoEps + s3) * (kWenoEps + s3));
  return (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3);
}

// Upwind WENO5 derivative of a padded line. pad has m + 6 entries with 3
// ghosts each side; d[i] = (pad[i+1]-pad[i])/h has m + 5 entries.
void weno5_line_derivative(const std::vector<double>& pad, double h, int m,
                           bool minus_biased, std::vector<double>& out) {
  static thread_local std::vector<double> d;
  d.resize(m + 5);
  for (int i = 0; i < m + 5; ++i) d[i] = (pad[i + 1] - pad[i]) / h;
  for (int i = 0; i < m; ++i) {
    if (minus_biased)
      out[i] = weno5_combine(d[i], d[i + 1], d[i + 2], d[i + 3], d[i + 4]);
    else
      out[i] = weno5_combine(d[i + 5], d[i + 4], d[i + 3], d[i + 2], d[i + 1]);
  }
}

// rhs = -(p du/dx - V'(x) du/dp) for one carried field.
void advection_rhs(const PhaseGrid& grid, const std::vector<double>& u,
                   const std::vector<double>& v1x, std::vector<double>& rhs) {
  const int nx = grid.xgrid.n;
  const int np = grid.np;
  const double hx = grid.xgrid.h;
  const double hp = grid.dp;

  // x-advection, one p-column at a time (speed p_k constant per column)
  parallel_for(0, np, [&](int k) {
    std::vector<double> pad(nx + 6), deriv(nx);
    for (int j = 0; j < nx; ++j) pad[j + 3] = u[static_cast<size_t>(j) * np + k];
    for (int g = 0; g < 3; ++g) {  // periodic in x
      pad[2 - g] = pad[nx + 2 - g];
      pad[nx + 3 + g] = pad[3 + g];
    }
    const double speed = grid.p_node(k);
    weno5_line_derivative(pad, hx, nx, speed >= 0.0, deriv);
    for (int j = 0; j < nx; ++j)
      rhs[static_cast<size_t>(j) * np + k] = -speed * deriv[j];
  });

  // p-advection, one x-row at a time (speed -V'(x_j) constant per row)
  parallel_for(0, nx, [&](int j) {
    const double speed = -v1x[j];
    if (speed == 0.0) return;
    std::vector<double> pad(np + 6), deriv(np);
    for (int k = 0; k < np; ++k) pad[k + 3] = u[static_cast<size_t>(j) * np + k];
    for (int g = 0; g < 3; ++g) {  // zeroth-order extrapolation in p
      pad[g] = pad[3];
      pad[np + 3 + g] = pad[np + 2];
    }
    weno5_line_derivative(pad, hp, np, speed >= 0.0, deriv);
    for (int k = 0; k < np; ++k)
      rhs[static_cast<size_t>(j) * np + k] -= speed * deriv[k];
  });
}

}  // namespace

LevelSetState ls_solve(const LevelSetState& state, const ScalarFn& v1,
                       double dt, double t_final) {
  if (!(dt > 0.0)) throw NumericError("ls_solve: dt must be positive");
  const double q = t_final / dt;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw NumericError("ls_solve: dt must divide t_final");
  const int steps = static_cast<int>(r);
  if (steps == 0) return state;

  const double dt_max = cfl_timestep(state.grid, v1, 1.0);
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "ls_solve: dt=" << dt << " violates the CFL bound " << dt_max;
    throw NumericError(os.str());
  }

  const int nx = state.grid.xgrid.n;
  const int np = state.grid.np;
  const size_t sz = static_cast<size_t>(nx) * np;

  std::vector<double> v1x(nx);
  for (int j = 0; j < nx; ++j) v1x[j] = v1(state.grid.xgrid.node(j));

  LevelSetState out = state;
  std::vector<double> rhs(sz), u1(sz), u2(sz);

  auto rk3 = [&](std::vector<double>& u) {
    advection_rhs(state.grid, u, v1x, rhs);
    for (size_t i = 0; i < sz; ++i) u1[i] = u[i] + dt * rhs[i];
    advection_rhs(state.grid, u1, v1x, rhs);
    for (size_t i = 0; i < sz; ++i)
      u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * rhs[i]);
    advection_rhs(state.grid, u2, v1x, rhs);
    for (size_t i = 0; i < sz; ++i)
      u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * rhs[i]);
  };

  for (int s = 0; s < steps; ++s) {
    rk3(out.f);
    rk3(out.phi);
  }
  out.t = state.t + t_final;
  return out;
}

double delta_kernel(const DeltaKernelSpec& spec, double s) {
  if (!(spec.eta > 0.0)) throw NumericError("delta_kernel: eta must be positive");
  const double a = std::abs(s);
  if (a > spec.eta) return 0.0;
  if (spec.kind == DeltaKernelKind::piecewise_linear)
    return (1.0 - a / spec.eta) / spec.eta;
  return (1.0 + std::cos(M_PI * s / spec.eta)) / (2.0 * spec.eta);
}

ObservablePair ls_observables(const LevelSetState& state,
                              const DeltaKernelSpec& spec) {
  const double ratio = spec.eta / state.grid.dp;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
    throw NumericError(
        "ls_observables: eta must be a positive integer multiple of dp");

  const int nx = state.grid.xgrid.n;
  const int np = state.grid.np;
  ObservablePair obs;
  obs.grid = state.grid.xgrid;
  obs.rho.assign(nx, 0.0);
  obs.current.assign(nx, 0.0);
  for (int j = 0; j < nx; ++j) {
    double rho = 0.0, cur = 0.0;
    for (int k = 0; k < np; ++k) {
      const double w = delta_kernel(spec, state.phiat(j, k)) * state.fat(j, k);
      rho += w;
      cur += state.grid.p_node(k) * w;
    }
    obs.rho[j] = rho * state.grid.dp;
    obs.current[j] = cur * state.grid.dp;
  }
  return obs;
}

}  // namespace mfs
