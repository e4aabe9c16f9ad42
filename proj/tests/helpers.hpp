#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "mfschrod/grid.hpp"
#include "mfschrod/multifidelity.hpp"

namespace mfs::test {

// Independent oracle for the greedy selection: dense modified Gram-Schmidt.
// At each step, project every column onto the span of the already-selected
// ones explicitly and pick the largest residual distance.
struct GreedyOracle {
  std::vector<int> indices;
  std::vector<double> residuals;
};

inline GreedyOracle gram_schmidt_greedy(
    const std::vector<std::vector<double>>& columns, double w, int k_max,
    double tol) {
  const int m = static_cast<int>(columns.size());
  const size_t len = columns[0].size();
  std::vector<std::vector<double>> ortho;  // orthonormal basis of the span
  GreedyOracle out;

  auto dotw = [w](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return w * s;
  };

  for (int step = 0; step < k_max; ++step) {
    double best = -1.0;
    int pick = -1;
    std::vector<double> best_res;
    for (int j = 0; j < m; ++j) {
      bool used = false;
      for (int idx : out.indices) used = used || idx == j;
      if (used) continue;
      std::vector<double> r = columns[j];
      for (const auto& q : ortho) {
        const double c = dotw(r, q);
        for (size_t i = 0; i < len; ++i) r[i] -= c * q[i];
      }
      const double d = std::sqrt(std::max(dotw(r, r), 0.0));
      if (d > best) {
        best = d;
        pick = j;
        best_res = r;
      }
    }
    if (pick < 0 || best < tol) break;
    out.indices.push_back(pick);
    out.residuals.push_back(best);
    if (best > 0.0) {
      for (size_t i = 0; i < len; ++i) best_res[i] /= best;
      // re-orthogonalize once for numerical hygiene
      for (const auto& q : ortho) {
        const double c = dotw(best_res, q);
        for (size_t i = 0; i < len; ++i) best_res[i] -= c * q[i];
      }
      const double n = std::sqrt(std::max(dotw(best_res, best_res), 0.0));
      if (n > 0.0)
        for (size_t i = 0; i < len; ++i) best_res[i] /= n;
      ortho.push_back(best_res);
    }
  }
  return out;
}

// Synthetic exact-rank-K pair of models sharing coefficient functions a_k(z):
// U^L(z) = sum a_k(z) B_k, U^H(z) = sum a_k(z) C_k. Algorithm 2.1 reproduces
// U^H exactly on such a pair.
struct RankKModels {
  FidelityModel low;
  FidelityModel high;
  int rank = 0;
};

inline RankKModels make_rank_k_models(int rank, int len_low, int len_high,
                                      unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto b = std::make_shared<std::vector<std::vector<double>>>();
  auto c = std::make_shared<std::vector<std::vector<double>>>();
  for (int k = 0; k < rank; ++k) {
    std::vector<double> bk(len_low), ck(len_high);
    for (auto& v : bk) v = unif(gen);
    for (auto& v : ck) v = unif(gen);
    b->push_back(bk);
    c->push_back(ck);
  }
  // smooth, independent coefficient functions
  auto coeff = [rank](const RandomSample& z) {
    std::vector<double> a(rank);
    for (int k = 0; k < rank; ++k) {
      double s = 0.25 * (k + 1);
      for (size_t i = 0; i < z.z.size(); ++i)
        s += std::cos((k + 1) * z.z[i] + 0.3 * k) / (i + 1.0);
      a[k] = s;
    }
    return a;
  };

  RankKModels out;
  out.rank = rank;
  out.low.name = "rank-k-low";
  out.low.dim = 3;
  out.low.grid = make_grid(0.0, 1.0, len_low);
  out.low.eval = [b, coeff, rank, len_low](const RandomSample& z) {
    const auto a = coeff(z);
    ObservablePair obs;
    obs.grid = make_grid(0.0, 1.0, len_low);
    obs.rho.assign(len_low, 0.0);
    obs.current.assign(len_low, 0.0);
    for (int k = 0; k < rank; ++k)
      for (int i = 0; i < len_low; ++i) {
        obs.rho[i] += a[k] * (*b)[k][i];
        obs.current[i] += a[k] * (*b)[k][(i + 1) % len_low];
      }
    return obs;
  };
  out.high.name = "rank-k-high";
  out.high.dim = 3;
  out.high.grid = make_grid(0.0, 1.0, len_high);
  out.high.eval = [c, coeff, rank, len_high](const RandomSample& z) {
    const auto a = coeff(z);
    ObservablePair obs;
    obs.grid = make_grid(0.0, 1.0, len_high);
    obs.rho.assign(len_high, 0.0);
    obs.current.assign(len_high, 0.0);
    for (int k = 0; k < rank; ++k)
      for (int i = 0; i < len_high; ++i) {
        obs.rho[i] += a[k] * (*c)[k][i];
        obs.current[i] += a[k] * (*c)[k][(i + 1) % len_high];
      }
    return obs;
  };
  return out;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mfs::test
