#include "mfschrod/observables.hpp"

#include <cmath>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/fourier.hpp"

namespace mfs {

double discrete_l2_norm(const std::vector<double>& v, double h) {
  if (h <= 0.0) throw NumericError("discrete_l2_norm: h must be positive");
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(h * s);
}

double discrete_l2_norm(const std::vector<cplx>& v, double h) {
  if (h <= 0.0) throw NumericError("discrete_l2_norm: h must be positive");
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(h * s);
}

WaveField wkb_initial(const WkbData& data, const RandomSample& z, double eps,
                      const SpatialGrid1D& grid) {
  if (!(eps > 0.0)) throw NumericError("wkb_initial: eps must be positive");
  WaveField field;
  field.grid = grid;
  field.eps = eps;
  field.t = 0.0;
  field.values.resize(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.node(j);
    const double n0 = data.n0(x, z);
    if (n0 < 0.0) {
      std::ostringstream os;
      os << "wkb_initial: n0 negative at node " << j << " (x=" << x
         << ", n0=" << n0 << ")";
      throw NumericError(os.str());
    }
    const double amp = std::sqrt(n0);
    const double phase = data.s0(x, z) / eps;
    field.values[j] = std::polar(amp, phase);
  }
  return field;
}

ObservablePair observables_from_wave(const WaveField& field) {
  ObservablePair obs;
  obs.grid = field.grid;
  obs.rho.resize(field.grid.n);
  obs.current.resize(field.grid.n);
  const auto dpsi = spectral_derivative(field.grid, field.values);
  for (int j = 0; j < field.grid.n; ++j) {
    obs.rho[j] = std::norm(field.values[j]);
    obs.current[j] = field.eps * std::imag(std::conj(field.values[j]) * dpsi[j]);
  }
  return obs;
}

ObservablePair restrict_observables(const ObservablePair& fine, int factor) {
  if (factor < 1 || fine.grid.n % factor != 0)
    throw NumericError("restrict_observables: factor must divide the fine grid size");
  ObservablePair out;
  out.grid = make_grid(fine.grid.a, fine.grid.b, fine.grid.n / factor);
  out.rho.resize(out.grid.n);
  out.current.resize(out.grid.n);
  for (int j = 0; j < out.grid.n; ++j) {
    out.rho[j] = fine.rho[static_cast<size_t>(j) * factor];
    out.current[j] = fine.current[static_cast<size_t>(j) * factor];
  }
  return out;
}

}  // namespace mfs
