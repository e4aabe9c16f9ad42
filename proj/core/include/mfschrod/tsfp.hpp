#pragma once

#include <functional>

#include "mfschrod/grid.hpp"

namespace mfs {

using PotentialFn = std::function<double(double, const RandomSample&)>;

// Time step tau > 0 with t_final an integer multiple of tau
// (1e-9 relative tolerance on the rounding).
struct TsfpConfig {
  double tau = 0.0;
  double t_final = 0.0;
};

// Number of steps t_final/tau; throws if the quotient is not an integer
// within 1e-9 relative tolerance.
int tsfp_step_count(const TsfpConfig& cfg);

// One Strang split step: half kinetic step in Fourier space
// (mode l -> exp(-i*eps*tau*mu_l^2/4)), full potential step
// (pointwise exp(-i*(tau/eps)*V(x_j,z))), second half kinetic step.
// tau may be negative (exact time reversal); non-finite V throws.
WaveField tsfp_step(const WaveField& field, const PotentialFn& v,
                    const RandomSample& z, double tau);

// Repeats tsfp_step t_final/tau times. Potential values are evaluated once
// per (z, grid) pair and reused for the whole loop.
WaveField tsfp_solve(const WaveField& field, const PotentialFn& v,
                     const RandomSample& z, const TsfpConfig& cfg);

// Same, invoking on_step(step_index, field) after every step.
WaveField tsfp_solve(const WaveField& field, const PotentialFn& v,
                     const RandomSample& z, const TsfpConfig& cfg,
                     const std::function<void(int, const WaveField&)>& on_step);

}  // namespace mfs
