#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

// A fidelity level: anything that maps a random sample to observables on a
// fixed grid. `eval` must be safe to call concurrently.
struct FidelityModel {
  std::string name;
  int dim = 0;  // random-space dimension
  SpatialGrid1D grid;
  std::function<ObservablePair(const RandomSample&)> eval;
};

enum class FidelityQuantity { rho, current, stacked };

// Discretized observable vectors over a training set, one column per sample.
// ip_weight is the quadrature weight of the discrete L2 inner product
// <u,v> = ip_weight * sum_m u_m v_m (the grid spacing h of the model).
struct SnapshotMatrix {
  std::vector<std::vector<double>> columns;
  std::vector<RandomSample> samples;
  double ip_weight = 1.0;
};

// Ordered greedy picks i_1..i_K and the projection distance achieved at each
// pick (non-increasing; the first entry is the largest column norm).
struct SelectionResult {
  std::vector<int> indices;
  std::vector<double> residuals;
};

// Gramian of the selected basis with a diagonal-pivot-truncated Cholesky
// factor: pivots below 1e-12 * max diagonal drop the basis vector from
// `active`. lambda_min is the smallest eigenvalue of the active block.
struct GalerkinSystem {
  Eigen::MatrixXd gram;
  Eigen::MatrixXd chol;  // lower triangular, zero rows/cols at inactive slots
  double lambda_min = 0.0;
  std::vector<int> active;
  double ip_weight = 1.0;
};

// Evaluates the model at every sample; column j is the requested quantity at
// samples[j]. `stacked` concatenates rho and current after dividing each
// quantity by its training-max weighted L2 norm. Model failure at sample j is
// rethrown naming j and z_j.
SnapshotMatrix build_snapshots(const FidelityModel& model,
                               const std::vector<RandomSample>& samples,
                               FidelityQuantity quantity);

// Greedy max-distance-to-span selection realized as pivoted Cholesky on the
// Gram matrix of all columns. Stops before k_max when the best remaining
// projection distance falls below tol.
SelectionResult greedy_select(const SnapshotMatrix& snap, int k_max, double tol);

GalerkinSystem assemble_gramian(const SnapshotMatrix& snap,
                                const std::vector<int>& indices);

// Solves G c = g with g_k = <u, basis_k> on the active block; inactive
// coefficients are zero.
std::vector<double> infer_coefficients(const GalerkinSystem& sys,
                                       const std::vector<std::vector<double>>& basis,
                                       const std::vector<double>& u);

// ||u - P_span(basis) u|| in the system's inner product.
double distance_to_span(const GalerkinSystem& sys,
                        const std::vector<std::vector<double>>& basis,
                        const std::vector<double>& u);

enum class SurrogateMode { bifidelity, trifidelity };

struct ModelTimings {
  double seconds_low = 0.0;
  double seconds_medium = 0.0;
  double seconds_high = 0.0;
  int evals_low = 0;
  int evals_medium = 0;
  int evals_high = 0;
};

// Per-quantity Galerkin machinery: inference-model snapshots at gamma_K, the
// matching high-fidelity snapshots, and the Gramian of the inference basis.
struct QuantitySystem {
  std::vector<std::vector<double>> basis;
  std::vector<std::vector<double>> high;
  GalerkinSystem sys;
};

struct SurrogatePipeline {
  SurrogateMode mode = SurrogateMode::bifidelity;
  FidelityModel low;
  std::optional<FidelityModel> medium;
  FidelityModel high;
  std::vector<RandomSample> training;
  SelectionResult selection;
  double ip_weight_inference = 1.0;
  double ip_weight_high = 1.0;
  QuantitySystem rho_sys;
  QuantitySystem cur_sys;
  ModelTimings timings;

  int k() const { return static_cast<int>(selection.indices.size()); }
  const FidelityModel& inference_model() const {
    return mode == SurrogateMode::trifidelity ? *medium : low;
  }
};

// Offline stage: low-fidelity snapshots over the whole training set, greedy
// selection on the stacked normalized snapshots, then inference-model and
// high-fidelity runs at gamma_K only. Wall-clock per model is recorded.
SurrogatePipeline offline_build(const FidelityModel& low,
                                const std::optional<FidelityModel>& medium,
                                const FidelityModel& high,
                                const std::vector<RandomSample>& training,
                                int k_max, double tol);

// Online stage at one sample: run the inference model, infer per-quantity
// coefficients, combine the high-fidelity snapshots.
ObservablePair surrogate_evaluate(const SurrogatePipeline& pipe,
                                  const RandomSample& z);

// Same, but restricted to the first r selected points and reusing an
// already-computed inference-model evaluation at z.
ObservablePair surrogate_evaluate_prefix(const SurrogatePipeline& pipe,
                                         const ObservablePair& inference_obs,
                                         int r);

// Gramian of the first r basis columns of a quantity system.
GalerkinSystem prefix_system(const QuantitySystem& q, double ip_weight, int r);

}  // namespace mfs
