#pragma once

#include <functional>
#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

using ScalarFn = std::function<double(double)>;

// Phase-space grid: periodic x-grid times p-nodes p_k = p_min + k*dp,
// k = 0..np-1, dp = (p_max - p_min)/np.
struct PhaseGrid {
  SpatialGrid1D xgrid;
  double p_min = 0.0;
  double p_max = 0.0;
  int np = 0;
  double dp = 0.0;

  double p_node(int k) const { return p_min + k * dp; }
};

PhaseGrid make_phase_grid(const SpatialGrid1D& xgrid, double p_min,
                          double p_max, int np);

// Density carrier f and level-set function phi, both nx x np row-major
// (index ix*np + ip).
struct LevelSetState {
  PhaseGrid grid;
  std::vector<double> f;
  std::vector<double> phi;
  double t = 0.0;

  double& fat(int ix, int ip) { return f[static_cast<size_t>(ix) * grid.np + ip]; }
  double fat(int ix, int ip) const { return f[static_cast<size_t>(ix) * grid.np + ip]; }
  double& phiat(int ix, int ip) { return phi[static_cast<size_t>(ix) * grid.np + ip]; }
  double phiat(int ix, int ip) const { return phi[static_cast<size_t>(ix) * grid.np + ip]; }
};

enum class DeltaKernelKind { piecewise_linear, cosine };

// Smoothed delta kernel with support half-width eta; eta must be a positive
// integer multiple of dp for the exact integration property to hold.
struct DeltaKernelSpec {
  DeltaKernelKind kind = DeltaKernelKind::cosine;
  double eta = 0.0;
};

// f(0,x,p) = n0(x), phi(0,x,p) = p - dS0/dx(x); the gradient is the analytic
// one if provided, else spectral differentiation of S0 samples.
LevelSetState ls_init(const WkbData& data, const RandomSample& z,
                      const PhaseGrid& grid);

// safety * min(dx, dp) / (2 * max(max_k |p_k|, max_j |V'(x_j)|));
// safety * min(dx, dp) when the advection speed vanishes everywhere.
double cfl_timestep(const PhaseGrid& grid, const ScalarFn& v1, double safety);

// Advances f and phi by the Liouville dynamics
//   d_t u + p d_x u - V'(x) d_p u = 0
// with WENO5 upwind derivatives (x periodic, p zeroth-order-extrapolation
// ghosts) and 3-stage TVD-RK3 in time. dt must divide t_final and satisfy
// the CFL bound (checked before stepping).
LevelSetState ls_solve(const LevelSetState& state, const ScalarFn& v1,
                       double dt, double t_final);

double delta_kernel(const DeltaKernelSpec& spec, double s);

// rho_j = sum_k f jk * delta_eta(phi_jk) * dp,
// J_j   = sum_k p_k f_jk * delta_eta(phi_jk) * dp.
ObservablePair ls_observables(const LevelSetState& state,
                              const DeltaKernelSpec& spec);

}  // namespace mfs
