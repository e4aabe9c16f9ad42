#include "mfschrod/fourier.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "mfschrod/errors.hpp"

namespace mfs {

namespace {
// FFTW's planner is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftWorkspace::FftWorkspace(int n) : n_(n) {
  if (n < 2) throw NumericError("FftWorkspace: n must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n));
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  fwd_ = fftw_plan_dft_1d(n, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_1d(n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (fwd_ == nullptr || bwd_ == nullptr)
    throw NumericError("FftWorkspace: plan creation failed");
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  if (buf_) fftw_free(buf_);
}

void FftWorkspace::forward(cplx* data) const {
  std::memcpy(buf_, data, sizeof(cplx) * n_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::memcpy(data, buf_, sizeof(cplx) * n_);
}

void FftWorkspace::inverse(cplx* data) const {
  std::memcpy(buf_, data, sizeof(cplx) * n_);
  fftw_execute(static_cast<fftw_plan>(bwd_));
  const double scale = 1.0 / n_;
  for (int j = 0; j < n_; ++j) data[j] = buf_[j] * scale;
}

std::vector<double> fourier_wavenumbers(const SpatialGrid1D& grid) {
  const double base = 2.0 * M_PI / (grid.b - grid.a);
  std::vector<double> mu(grid.n);
  for (int k = 0; k < grid.n; ++k) {
    const int l = (k < grid.n / 2) ? k : k - grid.n;
    mu[k] = base * l;
  }
  return mu;
}

std::vector<cplx> spectral_derivative(const SpatialGrid1D& grid,
                                      const std::vector<cplx>& values) {
  if (static_cast<int>(values.size()) != grid.n)
    throw NumericError("spectral_derivative: length mismatch with grid");
  FftWorkspace fft(grid.n);
  std::vector<cplx> hat = values;
  fft.forward(hat.data());
  const auto mu = fourier_wavenumbers(grid);
  for (int k = 0; k < grid.n; ++k) hat[k] *= cplx(0.0, mu[k]);
  fft.inverse(hat.data());
  return hat;
}

std::vector<double> spectral_derivative_real(const SpatialGrid1D& grid,
                                             const std::vector<double>& values) {
  std::vector<cplx> v(values.begin(), values.end());
  auto d = spectral_derivative(grid, v);
  std::vector<double> out(grid.n);
  for (int j = 0; j < grid.n; ++j) out[j] = d[j].real();
  return out;
}

}  // namespace mfs
