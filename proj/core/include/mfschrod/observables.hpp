#pragma once

#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

// sqrt(h * sum |v_j|^2)
double discrete_l2_norm(const std::vector<double>& v, double h);
double discrete_l2_norm(const std::vector<cplx>& v, double h);

// psi_j = sqrt(n0(x_j, z)) * exp(i*S0(x_j, z)/eps), t = 0.
// Throws NumericError if n0 is negative at any node, naming the node.
WaveField wkb_initial(const WkbData& data, const RandomSample& z, double eps,
                      const SpatialGrid1D& grid);

// rho_j = |psi_j|^2, J_j = eps * Im(conj(psi_j) * (D psi)_j) with D the
// spectral derivative of the trigonometric interpolant.
ObservablePair observables_from_wave(const WaveField& field);

// Restriction of observables to a coarser grid whose nodes are every
// `factor`-th node of the fine grid (grids must share [a, b)).
ObservablePair restrict_observables(const ObservablePair& fine, int factor);

}  // namespace mfs
