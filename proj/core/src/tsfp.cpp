#include "mfschrod/tsfp.hpp"

#include <cmath>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/fourier.hpp"

namespace mfs {

int tsfp_step_count(const TsfpConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw NumericError("tsfp: tau must be positive");
  if (cfg.t_final < 0.0) throw NumericError("tsfp: t_final must be >= 0");
  const double q = cfg.t_final / cfg.tau;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q)) {
    std::ostringstream os;
    os << "tsfp: t_final/tau = " << q
       << " is not an integer within 1e-9 relative tolerance";
    throw NumericError(os.str());
  }
  return static_cast<int>(r);
}

namespace {

std::vector<double> potential_table(const SpatialGrid1D& grid,
                                    const PotentialFn& v,
                                    const RandomSample& z) {
  std::vector<double> vals(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    vals[j] = v(grid.node(j), z);
    if (!std::isfinite(vals[j])) {
      std::ostringstream os;
      os << "tsfp: potential not finite at node " << j
         << " (x=" << grid.node(j) << ")";
      throw NumericError(os.str());
    }
  }
  return vals;
}

// Precomputed multipliers for a fixed (grid, eps, tau, z); applies Strang
// steps in place.
class Stepper {
 public:
  Stepper(const SpatialGrid1D& grid, double eps, double tau,
          const std::vector<double>& v_vals)
      : fft_(grid.n), kinetic_(grid.n), potential_(grid.n) {
    const auto mu = fourier_wavenumbers(grid);
    for (int k = 0; k < grid.n; ++k)
      kinetic_[k] = std::polar(1.0, -eps * tau * mu[k] * mu[k] / 4.0);
    for (int j = 0; j < grid.n; ++j)
      potential_[j] = std::polar(1.0, -(tau / eps) * v_vals[j]);
  }

  void step(std::vector<cplx>& psi) const {
    half_kick(psi);
    for (size_t j = 0; j < psi.size(); ++j) psi[j] *= potential_[j];
    half_kick(psi);
  }

 private:
  void half_kick(std::vector<cplx>& psi) const {
    fft_.forward(psi.data());
    for (size_t k = 0; k < psi.size(); ++k) psi[k] *= kinetic_[k];
    fft_.inverse(psi.data());
  }

  FftWorkspace fft_;
  std::vector<cplx> kinetic_;
  std::vector<cplx> potential_;
};

}  // namespace

WaveField tsfp_step(const WaveField& field, const PotentialFn& v,
                    const RandomSample& z, double tau) {
  WaveField out = field;
  if (tau == 0.0) return out;
  const auto v_vals = potential_table(field.grid, v, z);
  Stepper stepper(field.grid, field.eps, tau, v_vals);
  stepper.step(out.values);
  out.t += tau;
  return out;
}

WaveField tsfp_solve(const WaveField& field, const PotentialFn& v,
                     const RandomSample& z, const TsfpConfig& cfg) {
  return tsfp_solve(field, v, z, cfg, nullptr);
}

WaveField tsfp_solve(const WaveField& field, const PotentialFn& v,
                     const RandomSample& z, const TsfpConfig& cfg,
                     const std::function<void(int, const WaveField&)>& on_step) {
  const int steps = tsfp_step_count(cfg);
  WaveField out = field;
  if (steps == 0) return out;
  const auto v_vals = potential_table(field.grid, v, z);
  Stepper stepper(field.grid, field.eps, cfg.tau, v_vals);
  for (int s = 0; s < steps; ++s) {
    stepper.step(out.values);
    out.t = field.t + (s + 1) * cfg.tau;
    if (on_step) on_step(s, out);
  }
  out.t = field.t + cfg.t_final;
  return out;
}

}  // namespace mfs
