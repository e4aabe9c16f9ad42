#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

using ScalarFn = std::function<double(double)>;

// One frozen Gaussian: center q, momentum p, action s, complex amplitude,
// and the flow Jacobian d(Q,P)/d(q0,p0) stored row-major
// {dQ/dq0, dQ/dp0, dP/dq0, dP/dp0}. The flow is symplectic, so det(jac)
// stays 1 up to integration error.
struct FGAParticle {
  double q = 0.0;
  double p = 0.0;
  double s = 0.0;
  cplx amp{0.0, 0.0};
  std::array<double, 4> jac{1.0, 0.0, 0.0, 1.0};

  double jac_det() const { return jac[0] * jac[3] - jac[1] * jac[2]; }
};

struct FGAEnsemble {
  std::vector<FGAParticle> particles;
  double weight = 0.0;  // phase-space cell volume dq*dp per particle
  double eps = 1.0;
  double t = 0.0;
};

struct PhaseSpaceBox {
  double q_min, q_max, p_min, p_max;
};

// Windowed-Fourier amplitudes on a uniform nq x np cell-center mesh over the
// box: A(0,q,p) = sqrt(2) * Integral psi0(y) exp((i/eps)(-p(y-q)) - (y-q)^2/(2 eps)) dy,
// by trapezoidal quadrature on the field's own grid. Particles with
// |A| >= keep_threshold * max|A| are kept with s = 0 and identity Jacobian.
// Throws NumericError if the ensemble comes out empty.
FGAEnsemble fga_decompose(const WaveField& field, const PhaseSpaceBox& box,
                          int nq, int np, double keep_threshold);

// Classical RK4 on the coupled system per particle:
//   dQ/dt = P, dP/dt = -V'(Q), dS/dt = P^2/2 - V(Q), dM/dt = [[0,1],[-V''(Q),0]] M,
//   dA/dt = (A/2) * (dZ/dt)/Z  with Z = (d_q0 - i d_p0)(Q + i P) read off M.
// tau must divide t_final as in TsfpConfig. Throws NumericError naming the
// particle index if |Z| degenerates below 1e-12.
FGAEnsemble fga_evolve(const FGAEnsemble& ens, const ScalarFn& v0,
                       const ScalarFn& v1, const ScalarFn& v2, double tau,
                       double t_final);

// psi(x_j) = (2 pi eps)^{-3/2} * weight * sum_k A_k exp((i/eps)(S_k + P_k (x_j - Q_k)) - (x_j - Q_k)^2/(2 eps)).
// Contributions beyond |x - Q| > 10 sqrt(eps) are dropped (below 1e-15 of the
// particle's peak).
WaveField fga_reconstruct(const FGAEnsemble& ens, const SpatialGrid1D& grid);

}  // namespace mfs
