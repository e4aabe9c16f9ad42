#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace mfs {

using cplx = std::complex<double>;

// Uniform periodic grid on [a, b): nodes x_j = a + j*h, j = 0..n-1, with
// x_n identified with x_0. n must be even and positive.
struct SpatialGrid1D {
  double a = 0.0;
  double b = 1.0;
  int n = 0;
  double h = 0.0;

  double node(int j) const { return a + j * h; }
};

SpatialGrid1D make_grid(double a, double b, int n);

// Complex wavefunction samples on a periodic grid, with semiclassical
// parameter eps in (0, 1].
struct WaveField {
  SpatialGrid1D grid;
  double eps = 1.0;
  double t = 0.0;
  std::vector<cplx> values;
};

// Position density rho = |psi|^2 and current density J = eps*Im(conj(psi) dx psi).
struct ObservablePair {
  SpatialGrid1D grid;
  std::vector<double> rho;
  std::vector<double> current;
};

// A point of the random space [-1,1]^d.
struct RandomSample {
  std::vector<double> z;

  int dim() const { return static_cast<int>(z.size()); }
};

// WKB initial data sqrt(n0) * exp(i*S0/eps). s0_x is an optional analytic
// x-gradient of s0; solvers fall back to spectral differentiation when absent.
struct WkbData {
  std::function<double(double, const RandomSample&)> n0;
  std::function<double(double, const RandomSample&)> s0;
  std::function<double(double, const RandomSample&)> s0_x;  // may be null
};

}  // namespace mfs
