#pragma once

#include <functional>
#include <vector>

#include "mfschrod/multifidelity.hpp"

namespace mfs {

struct ErrorReport {
  double err_rho = 0.0;      // Err_1
  double err_current = 0.0;  // Err_2
  std::vector<double> per_sample_rho;
  std::vector<double> per_sample_current;
  int k_used = 0;
};

struct BoundReport {
  double bound_rho = 0.0;
  double bound_current = 0.0;
  double coverage_rho = 0.0;
  double coverage_current = 0.0;
  std::vector<double> per_sample_bound_rho;
  std::vector<double> per_sample_bound_current;
};

// (1/N) sum_i (1/N_x) sqrt(sum_j |ref_i[j] - approx_i[j]|^2).
// The 1/N_x factor multiplies outside the square root.
double mean_l2_error(const std::vector<std::vector<double>>& ref_set,
                     const std::vector<std::vector<double>>& approx_set);

// ||a - b|| / ||b|| in the h-weighted discrete L2 norm.
double relative_l2_error(const std::vector<double>& approx,
                         const std::vector<double>& ref, double h);

struct SampleBound {
  double rho = 0.0;
  double current = 0.0;
};

// Relative error bound for the surrogate at z_star built on the first k
// selected points:
//   d^Y(u^Y(z*), U^Y(gamma_k)) / ||u^Y(z*)|| * (c1 + c2 * R_e(z_{i_{k+1}}))
// with R_e the projected-residual ratio at the (k+1)-th pre-selected point.
// Requires the pipeline to hold at least k+1 selected points; throws
// NumericError when d^H(z_{k+1}, U^H(gamma_k)) < 1e-14.
SampleBound empirical_bound(const SurrogatePipeline& pipe,
                            const RandomSample& z_star, int k, double c1 = 1.0,
                            double c2 = 1.0);

// Batch version: per-sample bounds plus coverage against supplied true
// relative errors (fraction of samples with bound >= true error).
BoundReport empirical_bound_report(const SurrogatePipeline& pipe,
                                   const std::vector<RandomSample>& test,
                                   int k,
                                   const std::vector<double>& true_rel_rho,
                                   const std::vector<double>& true_rel_current,
                                   double c1 = 1.0, double c2 = 1.0);

// Gauss-Legendre mean over z in [-1,1] (weights normalized to sum 1, the
// uniform density). The scalar node is broadcast to every component of z.
ObservablePair sc_mean_estimate(const FidelityModel& model, int n_c);

struct ScTable {
  std::vector<int> n_c;
  std::vector<double> err_rho;      // ||mean_{n_c} - mean_{n_ref}||_{l2}, unweighted
  std::vector<double> err_current;
};

ScTable sc_error_table(const FidelityModel& model,
                       const std::vector<int>& n_c_list, int n_ref);

// For each eps: ||d rho/dz|| estimated by centered differences at 20
// Gauss-Legendre points along one random direction, combined in the L2_z
// (uniform density) x L2_x norm. direction picks the component to vary;
// a negative direction varies all components together.
std::vector<double> rho_z_diagnostic(
    const std::function<FidelityModel(double)>& model_for_eps,
    const std::vector<double>& eps_list, double dz = 1e-4, int direction = 0);

}  // namespace mfs
