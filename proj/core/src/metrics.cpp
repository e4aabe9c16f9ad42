#include "mfschrod/metrics.hpp"

#include <cmath>
#include <sstream>

#include "mfschrod/errors.hpp"
#include "mfschrod/observables.hpp"
#include "mfschrod/parallel.hpp"
#include "mfschrod/quadrature.hpp"

namespace mfs {

double mean_l2_error(const std::vector<std::vector<double>>& ref_set,
                     const std::vector<std::vector<double>>& approx_set) {
  if (ref_set.size() != approx_set.size() || ref_set.empty())
    throw NumericError("mean_l2_error: set sizes differ or are empty");
  const size_t nx = ref_set[0].size();
  double total = 0.0;
  for (size_t i = 0; i < ref_set.size(); ++i) {
    if (ref_set[i].size() != nx || approx_set[i].size() != nx)
      throw NumericError("mean_l2_error: vector length mismatch");
    double s = 0.0;
    for (size_t j = 0; j < nx; ++j) {
      const double d = ref_set[i][j] - approx_set[i][j];
      s += d * d;
    }
    // 1/N_x outside the square root
    total += std::sqrt(s) / static_cast<double>(nx);
  }
  return total / static_cast<double>(ref_set.size());
}

double relative_l2_error(const std::vector<double>& approx,
                         const std::vector<double>& ref, double h) {
  if (approx.size() != ref.size())
    throw NumericError("relative_l2_error: length mismatch");
  std::vector<double> diff(ref.size());
  for (size_t i = 0; i < ref.size(); ++i) diff[i] = approx[i] - ref[i];
  const double denom = discrete_l2_norm(ref, h);
  if (denom == 0.0) throw NumericError("relative_l2_error: zero reference");
  return discrete_l2_norm(diff, h) / denom;
}

namespace {

double weighted_norm(const std::vector<double>& v, double w) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(w * s);
}

// Projected-residual ratio R_e at the (k+1)-th pre-selected point for one
// quantity; shares the prefix-k systems with the caller.
double residual_ratio(const QuantitySystem& q, const GalerkinSystem& inf_sys,
                      const GalerkinSystem& high_sys, double w_high, int k) {
  std::vector<std::vector<double>> high_basis(q.high.begin(), q.high.begin() + k);
  const std::vector<double>& u_high_next = q.high[k];

  const double d_high = distance_to_span(high_sys, high_basis, u_high_next);
  if (d_high < 1e-14)
    throw NumericError("empirical_bound: degenerate denominator d^H(z_{k+1})");

  const auto alpha = infer_coefficients(high_sys, high_basis, u_high_next);

  std::vector<std::vector<double>> inf_basis(q.basis.begin(), q.basis.begin() + k);
  const auto c = infer_coefficients(inf_sys, inf_basis, q.basis[k]);

  double num2 = 0.0;
  const size_t nx = u_high_next.size();
  for (size_t j = 0; j < nx; ++j) {
    double proj = 0.0, sur = 0.0;
    for (int i = 0; i < k; ++i) {
      proj += alpha[i] * q.high[i][j];
      sur += c[i] * q.high[i][j];
    }
    num2 += (proj - sur) * (proj - sur);
  }
  return std::sqrt(w_high * num2) / d_high;
}

}  // namespace

SampleBound empirical_bound(const SurrogatePipeline& pipe,
                            const RandomSample& z_star, int k, double c1,
                            double c2) {
  if (k < 1 || k + 1 > pipe.k())
    throw NumericError(
        "empirical_bound: need k+1 selected points with high-fidelity snapshots");

  const ObservablePair u_star = pipe.inference_model().eval(z_star);
  SampleBound out;
  const double w_inf = pipe.ip_weight_inference;
  const double w_high = pipe.ip_weight_high;

  auto one_quantity = [&](const QuantitySystem& q, const std::vector<double>& u)
      -> double {
    const GalerkinSystem inf_sys = prefix_system(q, w_inf, k);
    SnapshotMatrix hm;
    hm.ip_weight = w_high;
    hm.columns.assign(q.high.begin(), q.high.begin() + k);
    hm.samples.resize(k);
    std::vector<int> all(k);
    for (int i = 0; i < k; ++i) all[i] = i;
    const GalerkinSystem high_sys = assemble_gramian(hm, all);

    const double re = residual_ratio(q, inf_sys, high_sys, w_high, k);
    std::vector<std::vector<double>> inf_basis(q.basis.begin(),
                                               q.basis.begin() + k);
    const double dist = distance_to_span(inf_sys, inf_basis, u);
    const double norm = weighted_norm(u, w_inf);
    if (norm == 0.0)
      throw NumericError("empirical_bound: inference solution has zero norm");
    return dist / norm * (c1 + c2 * re);
  };

  out.rho = one_quantity(pipe.rho_sys, u_star.rho);
  out.current = one_quantity(pipe.cur_sys, u_star.current);
  return out;
}

BoundReport empirical_bound_report(const SurrogatePipeline& pipe,
                                   const std::vector<RandomSample>& test,
                                   int k,
                                   const std::vector<double>& true_rel_rho,
                                   const std::vector<double>& true_rel_current,
                                   double c1, double c2) {
  BoundReport rep;
  rep.per_sample_bound_rho.resize(test.size());
  rep.per_sample_bound_current.resize(test.size());
  parallel_for(0, static_cast<int>(test.size()), [&](int i) {
    const SampleBound b = empirical_bound(pipe, test[i], k, c1, c2);
    rep.per_sample_bound_rho[i] = b.rho;
    rep.per_sample_bound_current[i] = b.current;
  });
  double sr = 0.0, sc = 0.0;
  int cr = 0, cc = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    sr += rep.per_sample_bound_rho[i];
    sc += rep.per_sample_bound_current[i];
    if (!true_rel_rho.empty() && rep.per_sample_bound_rho[i] >= true_rel_rho[i])
      ++cr;
    if (!true_rel_current.empty() &&
        rep.per_sample_bound_current[i] >= true_rel_current[i])
      ++cc;
  }
  rep.bound_rho = sr / test.size();
  rep.bound_current = sc / test.size();
  rep.coverage_rho =
      true_rel_rho.empty() ? 0.0 : static_cast<double>(cr) / test.size();
  rep.coverage_current =
      true_rel_current.empty() ? 0.0 : static_cast<double>(cc) / test.size();
  return rep;
}

ObservablePair sc_mean_estimate(const FidelityModel& model, int n_c) {
  if (n_c < 1) throw NumericError("sc_mean_estimate: n_c must be >= 1");
  const GaussRule rule = gauss_legendre(n_c);
  ObservablePair mean;
  mean.grid = model.grid;
  mean.rho.assign(model.grid.n, 0.0);
  mean.current.assign(model.grid.n, 0.0);

  std::vector<ObservablePair> evals(n_c);
  parallel_for(0, n_c, [&](int m) {
    RandomSample z;
    z.z.assign(model.dim, rule.nodes[m]);  // scalar node broadcast
    evals[m] = model.eval(z);
  });
  for (int m = 0; m < n_c; ++m) {
    const double w = rule.weights[m] / 2.0;  // uniform density on [-1,1]
    for (int j = 0; j < model.grid.n; ++j) {
      mean.rho[j] += w * evals[m].rho[j];
      mean.current[j] += w * evals[m].current[j];
    }
  }
  return mean;
}

ScTable sc_error_table(const FidelityModel& model,
                       const std::vector<int>& n_c_list, int n_ref) {
  for (int n : n_c_list)
    if (n_ref < n)
      throw NumericError("sc_error_table: n_ref must be at least every n_c");
  const ObservablePair ref = sc_mean_estimate(model, n_ref);
  ScTable table;
  for (int n : n_c_list) {
    const ObservablePair est = sc_mean_estimate(model, n);
    double sr = 0.0, sc = 0.0;
    for (int j = 0; j < model.grid.n; ++j) {
      sr += (est.rho[j] - ref.rho[j]) * (est.rho[j] - ref.rho[j]);
      sc += (est.current[j] - ref.current[j]) * (est.current[j] - ref.current[j]);
    }
    table.n_c.push_back(n);
    table.err_rho.push_back(std::sqrt(sr));  // unweighted l2 of the grid vector
    table.err_current.push_back(std::sqrt(sc));
  }
  return table;
}

std::vector<double> rho_z_diagnostic(
    const std::function<FidelityModel(double)>& model_for_eps,
    const std::vector<double>& eps_list, double dz, int direction) {
  if (!(dz > 0.0)) throw NumericError("rho_z_diagnostic: dz must be positive");
  const GaussRule rule = gauss_legendre(20);
  std::vector<double> norms;
  for (double eps : eps_list) {
    const FidelityModel model = model_for_eps(eps);
    if (direction >= model.dim)
      throw NumericError("rho_z_diagnostic: direction out of range");
    std::vector<double> contrib(rule.nodes.size());
    parallel_for(0, static_cast<int>(rule.nodes.size()), [&](int m) {
      RandomSample zp, zm;
      if (direction < 0) {
        zp.z.assign(model.dim, rule.nodes[m] + dz);
        zm.z.assign(model.dim, rule.nodes[m] - dz);
      } else {
        zp.z.assign(model.dim, 0.0);
        zm.z.assign(model.dim, 0.0);
        zp.z[direction] = rule.nodes[m] + dz;
        zm.z[direction] = rule.nodes[m] - dz;
      }
      const ObservablePair up = model.eval(zp);
      const ObservablePair um = model.eval(zm);
      double s = 0.0;
      for (int j = 0; j < model.grid.n; ++j) {
        const double d = (up.rho[j] - um.rho[j]) / (2.0 * dz);
        s += d * d;
      }
      contrib[m] = model.grid.h * s;
    });
    double total = 0.0;
    for (size_t m = 0; m < contrib.size(); ++m)
      total += (rule.weights[m] / 2.0) * contrib[m];
    norms.push_back(std::sqrt(total));
  }
  return norms;
}

}  // namespace mfs
