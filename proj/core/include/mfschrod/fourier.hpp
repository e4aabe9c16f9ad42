#pragma once

#include <memory>
#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

// Thin wrapper around a pair of 1D complex FFT plans of fixed size.
// Forward is unnormalized, inverse applies the 1/n factor, so
// inverse(forward(x)) == x. Plan creation is serialized internally; execution
// is safe to run concurrently on distinct workspaces.
class FftWorkspace {
 public:
  explicit FftWorkspace(int n);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  int size() const { return n_; }
  void forward(cplx* data) const;   // in place on data[0..n)
  void inverse(cplx* data) const;

 private:
  int n_;
  void* fwd_ = nullptr;  // fftw_plan
  void* bwd_ = nullptr;
  cplx* buf_ = nullptr;
};

// Wavenumbers mu_l = 2*pi*l/(b-a), l = -n/2..n/2-1, in FFT storage order
// (index k holds l = k for k < n/2 and l = k - n otherwise).
std::vector<double> fourier_wavenumbers(const SpatialGrid1D& grid);

// Derivative of the trigonometric interpolant: mode l is multiplied by i*mu_l.
std::vector<cplx> spectral_derivative(const SpatialGrid1D& grid,
                                      const std::vector<cplx>& values);
std::vector<double> spectral_derivative_real(const SpatialGrid1D& grid,
                                             const std::vector<double>& values);

}  // namespace mfs
