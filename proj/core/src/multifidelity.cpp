#include "mfschrod/multifidelity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/observables.hpp"
#include "mfschrod/parallel.hpp"

namespace mfs {

namespace {

constexpr double kPivotTruncation = 1e-12;  // relative to the max diagonal

double dot(const std::vector<double>& a, const std::vector<double>& b, double w) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return w * s;
}

std::string format_sample(const RandomSample& z) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < z.z.size(); ++i) {
    if (i) os << ", ";
    os << z.z[i];
  }
  os << ")";
  return os.str();
}

// Evaluates the model over the samples in parallel, preserving order, and
// accumulates wall-clock seconds.
std::vector<ObservablePair> evaluate_all(const FidelityModel& model,
                                         const std::vector<RandomSample>& samples,
                                         double* seconds) {
  std::vector<ObservablePair> out(samples.size());
  std::mutex time_mutex;
  parallel_for(0, static_cast<int>(samples.size()), [&](int j) {
    const auto start = std::chrono::steady_clock::now();
    try {
      out[j] = model.eval(samples[j]);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "model '" << model.name << "' failed at sample " << j
         << ", z=" << format_sample(samples[j]) << ": " << e.what();
      throw NumericError(os.str());
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    if (seconds != nullptr) {
      std::lock_guard<std::mutex> lock(time_mutex);
      *seconds += elapsed.count();
    }
  });
  return out;
}

std::vector<std::vector<double>> quantity_columns(
    const std::vector<ObservablePair>& evals, FidelityQuantity quantity,
    double ip_weight) {
  std::vector<std::vector<double>> cols(evals.size());
  if (quantity == FidelityQuantity::rho) {
    for (size_t j = 0; j < evals.size(); ++j) cols[j] = evals[j].rho;
    return cols;
  }
  if (quantity == FidelityQuantity::current) {
    for (size_t j = 0; j < evals.size(); ++j) cols[j] = evals[j].current;
    return cols;
  }
  // stacked: per-quantity normalization by the training-max weighted norm
  double max_rho = 0.0, max_cur = 0.0;
  for (const auto& e : evals) {
    max_rho = std::max(max_rho, discrete_l2_norm(e.rho, ip_weight));
    max_cur = std::max(max_cur, discrete_l2_norm(e.current, ip_weight));
  }
  if (max_rho == 0.0) max_rho = 1.0;
  if (max_cur == 0.0) max_cur = 1.0;
  for (size_t j = 0; j < evals.size(); ++j) {
    const auto& e = evals[j];
    auto& c = cols[j];
    c.resize(e.rho.size() + e.current.size());
    for (size_t i = 0; i < e.rho.size(); ++i) c[i] = e.rho[i] / max_rho;
    for (size_t i = 0; i < e.current.size(); ++i)
      c[e.rho.size() + i] = e.current[i] / max_cur;
  }
  return cols;
}

}  // namespace

SnapshotMatrix build_snapshots(const FidelityModel& model,
                               const std::vector<RandomSample>& samples,
                               FidelityQuantity quantity) {
  if (samples.empty()) throw NumericError("build_snapshots: no samples");
  SnapshotMatrix snap;
  snap.samples = samples;
  snap.ip_weight = model.grid.h;
  const auto evals = evaluate_all(model, samples, nullptr);
  snap.columns = quantity_columns(evals, quantity, snap.ip_weight);
  return snap;
}

SelectionResult greedy_select(const SnapshotMatrix& snap, int k_max, double tol) {
  const int m = static_cast<int>(snap.columns.size());
  if (k_max < 1 || k_max > m)
    throw NumericError("greedy_select: need 1 <= k_max <= column count");

  // Gram matrix of all columns; pivoted Cholesky keeps, per column, the
  // squared distance to the span of the already-selected columns on the
  // diagonal of the Schur complement.
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double gij = dot(snap.columns[i], snap.columns[j], snap.ip_weight);
      gram(i, j) = gij;
      gram(j, i) = gij;
    }
  }

  std::vector<double> dist2(m);
  for (int i = 0; i < m; ++i) dist2[i] = gram(i, i);
  Eigen::MatrixXd lfac(m, k_max);  // column k = k-th pivoted Cholesky column

  SelectionResult sel;
  for (int k = 0; k < k_max; ++k) {
    int pivot = 0;
    double best = -1.0;
    for (int i = 0; i < m; ++i) {
      if (std::find(sel.indices.begin(), sel.indices.end(), i) !=
          sel.indices.end())
        continue;
      if (dist2[i] > best) {
        best = dist2[i];
        pivot = i;
      }
    }
    const double residual = std::sqrt(std::max(best, 0.0));
    if (residual < tol) break;
    sel.indices.push_back(pivot);
    sel.residuals.push_back(residual);
    if (residual == 0.0) break;  // exact degeneracy, nothing left to add
    for (int i = 0; i < m; ++i) {
      double v = gram(i, pivot);
      for (int c = 0; c < k; ++c) v -= lfac(i, c) * lfac(pivot, c);
      lfac(i, k) = v / residual;
      dist2[i] -= lfac(i, k) * lfac(i, k);
    }
  }
  return sel;
}

GalerkinSystem assemble_gramian(const SnapshotMatrix& snap,
                                const std::vector<int>& indices) {
  const int k = static_cast<int>(indices.size());
  if (k < 1) throw NumericError("assemble_gramian: empty index set");
  for (int i = 0; i < k; ++i) {
    if (indices[i] < 0 || indices[i] >= static_cast<int>(snap.columns.size()))
      throw NumericError("assemble_gramian: index out of range");
    for (int j = i + 1; j < k; ++j)
      if (indices[i] == indices[j])
        throw NumericError("assemble_gramian: duplicate index");
  }

  GalerkinSystem sys;
  sys.ip_weight = snap.ip_weight;
  sys.gram.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= i; ++j) {
      const double g = dot(snap.columns[indices[i]], snap.columns[indices[j]],
                           snap.ip_weight);
      sys.gram(i, j) = g;
      sys.gram(j, i) = g;
    }

  sys.chol = Eigen::MatrixXd::Zero(k, k);
  const double max_diag = sys.gram.diagonal().maxCoeff();
  if (max_diag <= 0.0)
    throw NumericError("assemble_gramian: all snapshots are null");
  for (int i = 0; i < k; ++i) {
    double pivot = sys.gram(i, i);
    for (int c : sys.active) pivot -= sys.chol(i, c) * sys.chol(i, c);
    if (pivot < kPivotTruncation * max_diag) continue;  // basis vector dropped
    sys.chol(i, i) = std::sqrt(pivot);
    for (int r = i + 1; r < k; ++r) {
      double v = sys.gram(r, i);
      for (int c : sys.active) v -= sys.chol(r, c) * sys.chol(i, c);
      sys.chol(r, i) = v / sys.chol(i, i);
    }
    sys.active.push_back(i);
  }
  if (sys.active.empty())
    throw NumericError("assemble_gramian: all snapshots are null");

  const int na = static_cast<int>(sys.active.size());
  Eigen::MatrixXd sub(na, na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) sub(i, j) = sys.gram(sys.active[i], sys.active[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  sys.lambda_min = es.eigenvalues().minCoeff();
  return sys;
}

namespace {

// Solve G c = g on the active block using the stored factor.
std::vector<double> solve_active(const GalerkinSystem& sys,
                                 const std::vector<double>& g) {
  const int k = static_cast<int>(sys.gram.rows());
  const int na = static_cast<int>(sys.active.size());
  Eigen::VectorXd rhs(na);
  Eigen::MatrixXd lsub(na, na);
  for (int i = 0; i < na; ++i) {
    rhs(i) = g[sys.active[i]];
    for (int j = 0; j < na; ++j) lsub(i, j) = sys.chol(sys.active[i], sys.active[j]);
  }
  const Eigen::VectorXd y =
      lsub.triangularView<Eigen::Lower>().solve(rhs);
  const Eigen::VectorXd c =
      lsub.transpose().triangularView<Eigen::Upper>().solve(y);
  std::vector<double> out(k, 0.0);
  for (int i = 0; i < na; ++i) out[sys.active[i]] = c(i);
  return out;
}

std::vector<double> rhs_vector(const GalerkinSystem& sys,
                               const std::vector<std::vector<double>>& basis,
                               const std::vector<double>& u) {
  const int k = static_cast<int>(basis.size());
  std::vector<double> g(k);
  for (int i = 0; i < k; ++i) {
    if (basis[i].size() != u.size())
      throw NumericError("infer_coefficients: length mismatch");
    g[i] = dot(u, basis[i], sys.ip_weight);
  }
  return g;
}

}  // namespace

std::vector<double> infer_coefficients(const GalerkinSystem& sys,
                                       const std::vector<std::vector<double>>& basis,
                                       const std::vector<double>& u) {
  if (static_cast<int>(basis.size()) != sys.gram.rows())
    throw NumericError("infer_coefficients: basis size mismatch with system");
  return solve_active(sys, rhs_vector(sys, basis, u));
}

double distance_to_span(const GalerkinSystem& sys,
                        const std::vector<std::vector<double>>& basis,
                        const std::vector<double>& u) {
  const auto g = rhs_vector(sys, basis, u);
  const auto c = infer_coefficients(sys, basis, u);
  double proj = 0.0;
  for (size_t i = 0; i < c.size(); ++i) proj += g[i] * c[i];
  const double norm2 = dot(u, u, sys.ip_weight);
  return std::sqrt(std::max(norm2 - proj, 0.0));
}

SurrogatePipeline offline_build(const FidelityModel& low,
                                const std::optional<FidelityModel>& medium,
                                const FidelityModel& high,
                                const std::vector<RandomSample>& training,
                                int k_max, double tol) {
  if (training.empty()) throw NumericError("offline_build: empty training set");
  if (medium && (medium->dim != low.dim || high.dim != low.dim))
    throw NumericError("offline_build: models disagree on the random dimension");
  if (high.dim != low.dim)
    throw NumericError("offline_build: models disagree on the random dimension");

  SurrogatePipeline pipe;
  pipe.mode = medium ? SurrogateMode::trifidelity : SurrogateMode::bifidelity;
  pipe.low = low;
  pipe.medium = medium;
  pipe.high = high;
  pipe.training = training;
  pipe.ip_weight_inference = medium ? medium->grid.h : low.grid.h;
  pipe.ip_weight_high = high.grid.h;

  // Offline step 1: the cheapest model explores the whole training set.
  const auto low_evals = evaluate_all(low, training, &pipe.timings.seconds_low);
  pipe.timings.evals_low = static_cast<int>(training.size());

  SnapshotMatrix stacked;
  stacked.samples = training;
  stacked.ip_weight = low.grid.h;
  stacked.columns = quantity_columns(low_evals, FidelityQuantity::stacked,
                                     stacked.ip_weight);
  pipe.selection = greedy_select(stacked, k_max, tol);
  if (pipe.selection.indices.empty())
    throw NumericError("offline_build: greedy selection kept no points");

  std::vector<RandomSample> gamma;
  for (int idx : pipe.selection.indices) gamma.push_back(training[idx]);

  // Inference snapshots at gamma_K only. In bi-fidelity mode the low-model
  // evaluations are already available.
  std::vector<ObservablePair> inference_evals;
  if (medium) {
    inference_evals =
        evaluate_all(*medium, gamma, &pipe.timings.seconds_medium);
    pipe.timings.evals_medium = static_cast<int>(gamma.size());
  } else {
    for (int idx : pipe.selection.indices)
      inference_evals.push_back(low_evals[idx]);
  }

  const auto high_evals = evaluate_all(high, gamma, &pipe.timings.seconds_high);
  pipe.timings.evals_high = static_cast<int>(gamma.size());

  auto fill = [&](QuantitySystem& q, bool use_rho) {
    for (size_t i = 0; i < inference_evals.size(); ++i) {
      q.basis.push_back(use_rho ? inference_evals[i].rho
                                : inference_evals[i].current);
      q.high.push_back(use_rho ? high_evals[i].rho : high_evals[i].current);
    }
    SnapshotMatrix m;
    m.columns = q.basis;
    m.samples = gamma;
    m.ip_weight = pipe.ip_weight_inference;
    std::vector<int> all(q.basis.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    q.sys = assemble_gramian(m, all);
  };
  fill(pipe.rho_sys, true);
  fill(pipe.cur_sys, false);
  return pipe;
}

GalerkinSystem prefix_system(const QuantitySystem& q, double ip_weight, int r) {
  SnapshotMatrix m;
  m.ip_weight = ip_weight;
  m.columns.assign(q.basis.begin(), q.basis.begin() + r);
  m.samples.resize(r);
  std::vector<int> all(r);
  for (int i = 0; i < r; ++i) all[i] = i;
  return assemble_gramian(m, all);
}

ObservablePair surrogate_evaluate_prefix(const SurrogatePipeline& pipe,
                                         const ObservablePair& inference_obs,
                                         int r) {
  if (r < 1 || r > pipe.k())
    throw NumericError("surrogate_evaluate: r out of range");
  ObservablePair out;
  out.grid = pipe.high.grid;
  out.rho.assign(pipe.high.grid.n, 0.0);
  out.current.assign(pipe.high.grid.n, 0.0);

  auto apply = [&](const QuantitySystem& q, const std::vector<double>& u,
                   std::vector<double>& dest) {
    std::vector<std::vector<double>> basis(q.basis.begin(), q.basis.begin() + r);
    GalerkinSystem sys = (r == pipe.k())
                             ? q.sys
                             : prefix_system(q, pipe.ip_weight_inference, r);
    const auto c = infer_coefficients(sys, basis, u);
    for (int i = 0; i < r; ++i) {
      if (c[i] == 0.0) continue;
      const auto& col = q.high[i];
      for (size_t j = 0; j < dest.size(); ++j) dest[j] += c[i] * col[j];
    }
  };
  apply(pipe.rho_sys, inference_obs.rho, out.rho);
  apply(pipe.cur_sys, inference_obs.current, out.current);
  return out;
}

ObservablePair surrogate_evaluate(const SurrogatePipeline& pipe,
                                  const RandomSample& z) {
  const ObservablePair inf = pipe.inference_model().eval(z);
  return surrogate_evaluate_prefix(pipe, inf, pipe.k());
}

}  // namespace mfs
