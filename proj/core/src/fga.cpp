#include "mfschrod/fga.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/parallel.hpp"

namespace mfs {

namespace {

// Single-surface normalization a(0,q,p) = 2^{d/2}, d = 1; with it the
// continuous decompose-reconstruct identity reproduces psi0 exactly.
constexpr double kInitialAmplitude = 1.4142135623730951;  // sqrt(2)

// Gaussian envelopes are dropped beyond this many sqrt(eps): e^{-50} ~ 2e-22.
constexpr double kCutoffSigmas = 10.0;

cplx hk_prefactor_z(const std::array<double, 4>& m) {
  // Z = (d_q0 - i d_p0)(Q + iP) = m00 + m11 + i(m10 - m01)
  return {m[0] + m[3], m[2] - m[1]};
}

struct ParticleState {
  double q, p, s, m00, m01, m10, m11;
  cplx a;
};

ParticleState axpy(const ParticleState& y, double c, const ParticleState& d) {
  return {y.q + c * d.q,     y.p + c * d.p,     y.s + c * d.s,
          y.m00 + c * d.m00, y.m01 + c * d.m01, y.m10 + c * d.m10,
          y.m11 + c * d.m11, y.a + c * d.a};
}

}  // namespace

FGAEnsemble fga_decompose(const WaveField& field, const PhaseSpaceBox& box,
                          int nq, int np, double keep_threshold) {
  if (!(box.q_max > box.q_min) || !(box.p_max > box.p_min))
    throw NumericError("fga_decompose: empty phase-space box");
  if (nq < 2 || np < 2) throw NumericError("fga_decompose: nq, np must be >= 2");
  if (keep_threshold < 0.0 || keep_threshold >= 1.0)
    throw NumericError("fga_decompose: keep_threshold must lie in [0,1)");

  const SpatialGrid1D& g = field.grid;
  const double eps = field.eps;
  const double dq = (box.q_max - box.q_min) / nq;
  const double dp = (box.p_max - box.p_min) / np;
  const double radius = kCutoffSigmas * std::sqrt(eps);

  std::vector<cplx> amps(static_cast<size_t>(nq) * np);
  std::vector<double> gauss(g.n);
  for (int iq = 0; iq < nq; ++iq) {
    const double q = box.q_min + (iq + 0.5) * dq;
    // y-window on the field grid where the envelope is non-negligible
    int jlo = static_cast<int>(std::ceil((q - radius - g.a) / g.h));
    int jhi = static_cast<int>(std::floor((q + radius - g.a) / g.h));
    jlo = std::max(jlo, 0);
    jhi = std::min(jhi, g.n - 1);
    for (int j = jlo; j <= jhi; ++j) {
      const double y = g.node(j);
      gauss[j] = std::exp(-(y - q) * (y - q) / (2.0 * eps));
    }
    for (int ip = 0; ip < np; ++ip) {
      const double p = box.p_min + (ip + 0.5) * dp;
      cplx acc{0.0, 0.0};
      for (int j = jlo; j <= jhi; ++j) {
        const double y = g.node(j);
        acc += field.values[j] * gauss[j] * std::polar(1.0, -p * (y - q) / eps);
      }
      amps[static_cast<size_t>(iq) * np + ip] = kInitialAmplitude * g.h * acc;
    }
  }

  double max_amp = 0.0;
  for (const cplx& a : amps) max_amp = std::max(max_amp, std::abs(a));
  if (max_amp == 0.0)
    throw NumericError("fga_decompose: all amplitudes vanish (empty ensemble)");

  FGAEnsemble ens;
  ens.weight = dq * dp;
  ens.eps = eps;
  ens.t = field.t;
  const double cut = keep_threshold * max_amp;
  for (int iq = 0; iq < nq; ++iq) {
    for (int ip = 0; ip < np; ++ip) {
      const cplx a = amps[static_cast<size_t>(iq) * np + ip];
      if (std::abs(a) < cut) continue;
      FGAParticle part;
      part.q = box.q_min + (iq + 0.5) * dq;
      part.p = box.p_min + (ip + 0.5) * dp;
      part.s = 0.0;
      part.amp = a;
      part.jac = {1.0, 0.0, 0.0, 1.0};
      ens.particles.push_back(part);
    }
  }
  if (ens.particles.empty())
    throw NumericError("fga_decompose: threshold removed every particle");
  return ens;
}

FGAEnsemble fga_evolve(const FGAEnsemble& ens, const ScalarFn& v0,
                       const ScalarFn& v1, const ScalarFn& v2, double tau,
                       double t_final) {
  if (!(tau > 0.0)) throw NumericError("fga_evolve: tau must be positive");
  const double q = t_final / tau;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw NumericError("fga_evolve: tau must divide t_final");
  const int steps = static_cast<int>(r);

  FGAEnsemble out = ens;
  if (steps == 0) return out;

  parallel_for(0, static_cast<int>(out.particles.size()), [&](int idx) {
    FGAParticle& part = out.particles[idx];
    ParticleState y{part.q,      part.p,      part.s,      part.jac[0],
                    part.jac[1], part.jac[2], part.jac[3], part.amp};

    auto deriv = [&](const ParticleState& s) -> ParticleState {
      const cplx z = hk_prefactor_z({s.m00, s.m01, s.m10, s.m11});
      if (std::abs(z) < 1e-12) {
        std::ostringstream os;
        os << "fga_evolve: singular Z at particle " << idx;
        throw NumericError(os.str());
      }
      const double vq1 = v1(s.q);
      const double vq2 = v2(s.q);
      // dZ/dt = d_z P - i V'' d_z Q with d_z = d_q0 - i d_p0
      const cplx dz_p{s.m10, -s.m11};
      const cplx dz_q{s.m00, -s.m01};
      const cplx zdot = dz_p - cplx(0.0, 1.0) * vq2 * dz_q;
      ParticleState d;
      d.q = s.p;
      d.p = -vq1;
      d.s = 0.5 * s.p * s.p - v0(s.q);
      d.m00 = s.m10;
      d.m01 = s.m11;
      d.m10 = -vq2 * s.m00;
      d.m11 = -vq2 * s.m01;
      d.a = 0.5 * s.a * (zdot / z);
      return d;
    };

    for (int step = 0; step < steps; ++step) {
      const ParticleState k1 = deriv(y);
      const ParticleState k2 = deriv(axpy(y, 0.5 * tau, k1));
      const ParticleState k3 = deriv(axpy(y, 0.5 * tau, k2));
      const ParticleState k4 = deriv(axpy(y, tau, k3));
      ParticleState sum = k1;
      sum = axpy(sum, 2.0, k2);
      sum = axpy(sum, 2.0, k3);
      sum = axpy(sum, 1.0, k4);
      y = axpy(y, tau / 6.0, sum);
    }

    part.q = y.q;
    part.p = y.p;
    part.s = y.s;
    part.jac = {y.m00, y.m01, y.m10, y.m11};
    part.amp = y.a;
  });

  out.t = ens.t + t_final;
  return out;
}

WaveField fga_reconstruct(const FGAEnsemble& ens, const SpatialGrid1D& grid) {
  if (ens.particles.empty())
    throw NumericError("fga_reconstruct: empty ensemble");
  const double eps = ens.eps;
  const double prefactor =
      std::pow(2.0 * M_PI * eps, -1.5) * ens.weight;  // d = 1: exponent 3/2
  const double radius = kCutoffSigmas * std::sqrt(eps);

  WaveField field;
  field.grid = grid;
  field.eps = eps;
  field.t = ens.t;
  field.values.assign(grid.n, cplx{0.0, 0.0});

  // Fixed particle order per grid point keeps the sum deterministic under
  // any thread count.
  parallel_for(0, grid.n, [&](int j) {
    const double x = grid.node(j);
    cplx acc{0.0, 0.0};
    for (const FGAParticle& part : ens.particles) {
      const double dx = x - part.q;
      if (std::abs(dx) > radius) continue;
      const double envelope = std::exp(-dx * dx / (2.0 * eps));
      const double phase = (part.s + part.p * dx) / eps;
      acc += part.amp * envelope * std::polar(1.0, phase);
    }
    field.values[j] = prefactor * acc;
  });
  return field;
}

}  // namespace mfs
