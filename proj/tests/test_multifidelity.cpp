#include <doctest.h>

#include <atomic>
#include <cmath>
#include <memory>
#include <random>

#include "helpers.hpp"
#include "mfschrod/parallel.hpp"
#include "mfschrod/errors.hpp"
#include "mfschrod/multifidelity.hpp"
#include "mfschrod/observables.hpp"
#include "mfschrod/rng.hpp"

using namespace mfs;
using namespace mfs::test;

namespace {

SnapshotMatrix matrix_of(std::vector<std::vector<double>> cols, double w) {
  SnapshotMatrix m;
  m.columns = std::move(cols);
  m.samples.resize(m.columns.size());
  m.ip_weight = w;
  return m;
}

FidelityModel counting_model(const RankKModels& models, bool high,
                             std::shared_ptr<std::atomic<int>> counter) {
  FidelityModel m = high ? models.high : models.low;
  auto inner = m.eval;
  m.eval = [inner, counter](const RandomSample& z) {
    counter->fetch_add(1);
    return inner(z);
  };
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("multifidelity");

TEST_CASE("build_snapshots basics") {
  const RankKModels models = make_rank_k_models(3, 12, 24, 5);
  const auto samples = sample_uniform(3, 6, 42);

  const SnapshotMatrix one =
      build_snapshots(models.low, {samples[0]}, FidelityQuantity::rho);
  CHECK(one.columns.size() == 1);
  CHECK(one.columns[0] == models.low.eval(samples[0]).rho);

  const SnapshotMatrix fwd =
      build_snapshots(models.low, samples, FidelityQuantity::stacked);
  auto perm = samples;
  std::swap(perm[0], perm[3]);
  std::swap(perm[2], perm[5]);
  const SnapshotMatrix bwd =
      build_snapshots(models.low, perm, FidelityQuantity::stacked);
  CHECK(fwd.columns[0] == bwd.columns[3]);
  CHECK(fwd.columns[2] == bwd.columns[5]);
  CHECK(fwd.columns[1] == bwd.columns[1]);
}

TEST_CASE("build_snapshots names the failing sample") {
  FidelityModel broken;
  broken.name = "broken";
  broken.dim = 2;
  broken.grid = make_grid(0.0, 1.0, 4);
  broken.eval = [](const RandomSample& z) -> ObservablePair {
    if (z.z[0] > 0.0) throw std::runtime_error("boom");
    ObservablePair obs;
    obs.grid = make_grid(0.0, 1.0, 4);
    obs.rho.assign(4, 1.0);
    obs.current.assign(4, 0.0);
    return obs;
  };
  std::vector<RandomSample> samples(3);
  samples[0].z = {-0.5, 0.0};
  samples[1].z = {0.5, 0.0};
  samples[2].z = {-0.1, 0.0};
  CHECK_THROWS_WITH_AS(
      build_snapshots(broken, samples, FidelityQuantity::rho),
      doctest::Contains("sample 1"), NumericError);
}

TEST_CASE("greedy on identical columns stops after one pick") {
  const std::vector<double> c{1.0, 2.0, 2.0};
  const SnapshotMatrix snap = matrix_of({c, c, c, c}, 1.0);
  const SelectionResult sel = greedy_select(snap, 4, 1e-10);
  CHECK(sel.indices.size() == 1);
  CHECK(sel.residuals.size() == 1);
  CHECK(sel.residuals[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("greedy on orthogonal columns selects by norm") {
  const SnapshotMatrix snap = matrix_of(
      {{0.0, 2.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 0.0, 0.0}}, 1.0);
  const SelectionResult sel = greedy_select(snap, 3, 1e-14);
  CHECK(sel.indices == std::vector<int>{2, 0, 1});
  REQUIRE(sel.residuals.size() == 3);
  CHECK(sel.residuals[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sel.residuals[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sel.residuals[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("greedy residuals match the dense Gram-Schmidt oracle") {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> msize(3, 50);
  std::uniform_int_distribution<int> extra(0, 12);
  for (int instance = 0; instance < 30; ++instance) {
    const int m = msize(gen);
    const int len = m + extra(gen);  // full column rank almost surely
    const double w = std::pow(10.0, unif(gen));
    std::vector<std::vector<double>> cols(m, std::vector<double>(len));
    for (auto& c : cols)
      for (auto& v : c) v = unif(gen);
    double tol = 0.0;
    if (instance % 3 == 0) {
      // inject exact degeneracies; the tolerance must stop the selection
      // before the residual hits the factorization noise floor
      cols[m - 1] = cols[0];
      if (m > 4)
        for (int i = 0; i < len; ++i)
          cols[m - 2][i] = 0.5 * cols[1][i] - 2.0 * cols[2][i];
      tol = 1e-6;
    }
    const SnapshotMatrix snap = matrix_of(cols, w);
    const int k_max = m;
    const SelectionResult sel = greedy_select(snap, k_max, tol);
    const GreedyOracle oracle = gram_schmidt_greedy(cols, w, k_max, tol);
    REQUIRE(sel.indices.size() == oracle.indices.size());
    for (size_t k = 0; k < sel.indices.size(); ++k) {
      CHECK(sel.indices[k] == oracle.indices[k]);
      CHECK(std::abs(sel.residuals[k] - oracle.residuals[k]) <= 1e-8);
    }
    for (size_t k = 1; k < sel.residuals.size(); ++k)
      CHECK(sel.residuals[k] <= sel.residuals[k - 1] + 1e-12);
  }
}

TEST_CASE("gramian of orthonormal columns is the identity") {
  const SnapshotMatrix snap = matrix_of(
      {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}, 1.0);
  const GalerkinSystem sys = assemble_gramian(snap, {0, 1, 2});
  CHECK(sys.active.size() == 3);
  CHECK(sys.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(sys.gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("duplicated column is truncated out of the active set") {
  const std::vector<double> a{1.0, 2.0}, b{0.0, 1.0};
  const SnapshotMatrix snap = matrix_of({a, b, a}, 0.5);
  const GalerkinSystem sys = assemble_gramian(snap, {0, 1, 2});
  CHECK(sys.active == std::vector<int>{0, 1});
}

TEST_CASE("lambda_min agrees with a dense eigensolver oracle") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> cols(5, std::vector<double>(20));
  for (auto& c : cols)
    for (auto& v : c) v = unif(gen);
  const double w = 0.05;
  const SnapshotMatrix snap = matrix_of(cols, w);
  const GalerkinSystem sys = assemble_gramian(snap, {0, 1, 2, 3, 4});

  Eigen::MatrixXd g(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int r = 0; r < 20; ++r) s += cols[i][r] * cols[j][r];
      g(i, j) = w * s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  CHECK(std::abs(sys.lambda_min - es.eigenvalues().minCoeff()) <= 1e-10);
}

TEST_CASE("all-null snapshots are rejected") {
  const SnapshotMatrix snap =
      matrix_of({{0.0, 0.0}, {0.0, 0.0}}, 1.0);
  CHECK_THROWS_AS(assemble_gramian(snap, {0, 1}), NumericError);
}

TEST_CASE("coefficient inference on orthonormal and orthogonal data") {
  const std::vector<std::vector<double>> basis{
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  const SnapshotMatrix snap = matrix_of(basis, 1.0);
  const GalerkinSystem sys = assemble_gramian(snap, {0, 1});

  auto c = infer_coefficients(sys, basis, {1.0, 0.0, 0.0});
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c[1]) <= 1e-12);

  c = infer_coefficients(sys, basis, {0.0, 0.0, 5.0});
  CHECK(std::abs(c[0]) <= 1e-12);
  CHECK(std::abs(c[1]) <= 1e-12);
}

TEST_CASE("projection reproduces vectors in the span and is idempotent") {
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> basis(4, std::vector<double>(15));
  for (auto& c : basis)
    for (auto& v : c) v = unif(gen);
  const double w = 0.37;
  const SnapshotMatrix snap = matrix_of(basis, w);
  const GalerkinSystem sys = assemble_gramian(snap, {0, 1, 2, 3});

  std::vector<double> u(15, 0.0);
  const std::vector<double> mix{0.3, -1.2, 0.8, 2.1};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 15; ++i) u[i] += mix[k] * basis[k][i];

  const auto c = infer_coefficients(sys, basis, u);
  std::vector<double> rec(15, 0.0);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 15; ++i) rec[i] += c[k] * basis[k][i];
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < 15; ++i) {
    err = std::max(err, std::abs(rec[i] - u[i]));
    scale = std::max(scale, std::abs(u[i]));
  }
  CHECK(err <= 1e-8 * scale);

  const auto c2 = infer_coefficients(sys, basis, rec);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(c2[k] - c[k]) <= 1e-10);

  CHECK(distance_to_span(sys, basis, u) <= 1e-7);
}

TEST_CASE("coefficients are invariant under joint scaling") {
  std::mt19937 gen(123);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> basis(3, std::vector<double>(10));
  for (auto& c : basis)
    for (auto& v : c) v = unif(gen);
  std::vector<double> u(10);
  for (auto& v : u) v = unif(gen);

  const GalerkinSystem sys = assemble_gramian(matrix_of(basis, 1.0), {0, 1, 2});
  const auto c_ref = infer_coefficients(sys, basis, u);

  const double s = 37.5;
  auto scaled = basis;
  for (auto& col : scaled)
    for (auto& v : col) v *= s;
  auto us = u;
  for (auto& v : us) v *= s;
  const GalerkinSystem sys_s =
      assemble_gramian(matrix_of(scaled, 1.0), {0, 1, 2});
  const auto c_s = infer_coefficients(sys_s, scaled, us);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(c_s[k] - c_ref[k]) <= 1e-10);
}

TEST_CASE("exact rank-K model is reproduced by the bi-fidelity surrogate") {
  const RankKModels models = make_rank_k_models(5, 16, 40, 17);
  const auto training = sample_uniform(3, 40, 7);
  const SurrogatePipeline pipe =
      offline_build(models.low, std::nullopt, models.high, training, 8, 1e-6);
  CHECK(pipe.k() == 5);  // the manifold has exact rank 5

  const auto test = sample_uniform(3, 20, 8);
  for (const auto& z : test) {
    const ObservablePair exact = models.high.eval(z);
    const ObservablePair sur = surrogate_evaluate(pipe, z);
    CHECK(max_abs_diff(exact.rho, sur.rho) <= 1e-10);
    CHECK(max_abs_diff(exact.current, sur.current) <= 1e-10);
  }

  // surrogate scales linearly with the high-fidelity snapshots
  SurrogatePipeline scaled = pipe;
  for (auto& col : scaled.rho_sys.high)
    for (auto& v : col) v *= 2.0;
  const RandomSample z = test[0];
  const ObservablePair base = surrogate_evaluate(pipe, z);
  const ObservablePair twice = surrogate_evaluate(scaled, z);
  for (size_t i = 0; i < base.rho.size(); ++i)
    CHECK(twice.rho[i] == doctest::Approx(2.0 * base.rho[i]).epsilon(1e-12));
}

TEST_CASE("surrogate reproduces the high snapshot at a selected point") {
  const RankKModels models = make_rank_k_models(4, 12, 30, 3);
  const auto training = sample_uniform(3, 25, 77);
  const SurrogatePipeline pipe =
      offline_build(models.low, std::nullopt, models.high, training, 4, 1e-12);
  REQUIRE(pipe.k() >= 1);
  const RandomSample z_sel = training[pipe.selection.indices[0]];
  const ObservablePair expected = models.high.eval(z_sel);
  const ObservablePair sur = surrogate_evaluate(pipe, z_sel);
  CHECK(max_abs_diff(expected.rho, sur.rho) <= 1e-8);
  CHECK(max_abs_diff(expected.current, sur.current) <= 1e-8);
}

TEST_CASE("offline stage respects the eval budget") {
  const RankKModels models = make_rank_k_models(3, 10, 20, 9);
  auto low_count = std::make_shared<std::atomic<int>>(0);
  auto med_count = std::make_shared<std::atomic<int>>(0);
  auto high_count = std::make_shared<std::atomic<int>>(0);
  const FidelityModel low = counting_model(models, false, low_count);
  FidelityModel medium = counting_model(models, false, med_count);
  medium.name = "rank-k-medium";
  const FidelityModel high = counting_model(models, true, high_count);

  const auto training = sample_uniform(3, 30, 5);

  SUBCASE("k_max = 1 runs the high model exactly once") {
    const SurrogatePipeline pipe =
        offline_build(low, std::nullopt, high, training, 1, 0.0);
    CHECK(pipe.k() == 1);
    CHECK(high_count->load() == 1);
  }

  SUBCASE("tri-fidelity runs the medium model K times, never on the full set") {
    const SurrogatePipeline pipe =
        offline_build(low, medium, high, training, 3, 0.0);
    CHECK(pipe.mode == SurrogateMode::trifidelity);
    CHECK(med_count->load() == pipe.k());
    CHECK(pipe.k() < static_cast<int>(training.size()));
    CHECK(low_count->load() == static_cast<int>(training.size()));
    CHECK(pipe.timings.evals_medium == pipe.k());
  }
}

TEST_CASE("snapshot builds are bitwise identical across thread counts") {
  const RankKModels models = make_rank_k_models(4, 20, 30, 11);
  const auto samples = sample_uniform(3, 16, 64);
  const int saved = num_threads();
  set_num_threads(1);
  const SnapshotMatrix serial =
      build_snapshots(models.low, samples, FidelityQuantity::stacked);
  set_num_threads(4);
  const SnapshotMatrix parallel =
      build_snapshots(models.low, samples, FidelityQuantity::stacked);
  set_num_threads(saved);
  REQUIRE(serial.columns.size() == parallel.columns.size());
  for (size_t j = 0; j < serial.columns.size(); ++j)
    CHECK(serial.columns[j] == parallel.columns[j]);
}

TEST_SUITE_END();
