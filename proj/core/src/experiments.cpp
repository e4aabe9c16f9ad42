#include "mfschrod/experiments.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfschrod/archive.hpp"
#include "mfschrod/csv.hpp"
#include "mfschrod/errors.hpp"
#include "mfschrod/fga.hpp"
#include "mfschrod/metrics.hpp"
#include "mfschrod/observables.hpp"
#include "mfschrod/parallel.hpp"
#include "mfschrod/quadrature.hpp"
#include "mfschrod/rng.hpp"
#include "mfschrod/version.hpp"

namespace mfs {

namespace fs = std::filesystem;

ProblemId problem_id_from_string(const std::string& s) {
  if (s == "test1") return ProblemId::test1;
  if (s == "test2a") return ProblemId::test2a;
  if (s == "test2b_shift") return ProblemId::test2b_shift;
  if (s == "test2b_quadratic") return ProblemId::test2b_quadratic;
  if (s == "test2c_kl") return ProblemId::test2c_kl;
  throw ConfigError("unknown problem id '" + s + "'");
}

std::string to_string(ProblemId id) {
  switch (id) {
    case ProblemId::test1: return "test1";
    case ProblemId::test2a: return "test2a";
    case ProblemId::test2b_shift: return "test2b_shift";
    case ProblemId::test2b_quadratic: return "test2b_quadratic";
    case ProblemId::test2c_kl: return "test2c_kl";
  }
  throw ConfigError("unknown problem id");
}

// ---------------------------------------------------------------------------
// Karhunen-Loeve field

double KLField::eval(int k, double x) const {
  if (k < 0 || k >= static_cast<int>(eigvals.size()))
    throw NumericError("KLField::eval: mode index out of range");
  const double lambda = eigvals[k];
  if (lambda < 1e-300) return 0.0;
  double s = 0.0;
  for (size_t m = 0; m < nodes.size(); ++m) {
    const double u = x - nodes[m];
    s += weights[m] * sigma * sigma * std::exp(-u * u / (l * l)) *
         eigfuncs(static_cast<int>(m), k);
  }
  return s / lambda;
}

KLField kl_eigenpairs(double l, double sigma, int d1, int nq, double a, double b) {
  if (d1 < 1) throw NumericError("kl_eigenpairs: d1 must be >= 1");
  if (nq < 8 * d1) throw NumericError("kl_eigenpairs: need nq >= 8*d1");
  if (!(l > 0.0)) throw NumericError("kl_eigenpairs: l must be positive");
  if (sigma < 0.0) throw NumericError("kl_eigenpairs: sigma must be >= 0");

  KLField field;
  field.l = l;
  field.sigma = sigma;
  const GaussRule rule = gauss_legendre(nq);
  field.nodes.resize(nq);
  field.weights.resize(nq);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < nq; ++i) {
    field.nodes[i] = mid + half * rule.nodes[i];
    field.weights[i] = half * rule.weights[i];
  }

  Eigen::MatrixXd bmat(nq, nq);
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j <= i; ++j) {
      const double u = field.nodes[i] - field.nodes[j];
      const double c = sigma * sigma * std::exp(-u * u / (l * l));
      const double v = std::sqrt(field.weights[i] * field.weights[j]) * c;
      bmat(i, j) = v;
      bmat(j, i) = v;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bmat);
  const double lambda_max = es.eigenvalues().maxCoeff();
  field.eigvals.resize(d1);
  field.eigfuncs.resize(nq, d1);
  for (int k = 0; k < d1; ++k) {
    const double lambda = es.eigenvalues()(nq - 1 - k);  // descending
    if (lambda < -1e-10 * std::max(lambda_max, 1.0))
      throw NumericError("kl_eigenpairs: covariance is not PSD");
    field.eigvals[k] = std::max(lambda, 0.0);
    for (int i = 0; i < nq; ++i)
      field.eigfuncs(i, k) =
          es.eigenvectors()(i, nq - 1 - k) / std::sqrt(field.weights[i]);
  }
  return field;
}

// ---------------------------------------------------------------------------
// Problem definitions

namespace {

// sum_{k=1..d1} z[offset+k-1] / (2k)
double group_sum(const RandomSample& z, int offset, int d1) {
  double s = 0.0;
  for (int k = 1; k <= d1; ++k) s += z.z[offset + k - 1] / (2.0 * k);
  return s;
}

int even_round(double x) {
  int n = static_cast<int>(std::lround(x));
  if (n % 2 != 0) ++n;
  return n;
}

MeshDefaults test1_meshes(double eps) {
  MeshDefaults m;
  m.tsfp.nx = even_round(std::max(256.0, 31.25 / eps));
  if (std::abs(eps - 1.0 / 256.0) < 1e-12) m.tsfp.nx = 7680;
  m.tsfp.dt_target = 1e-3;

  m.fga.nx = even_round(std::max(64.0, 1.0 / eps));
  m.fga.dt_target = 1e-2;
  m.fga.nq = 52;
  m.fga.np = 48;
  m.fga.keep_threshold = 1e-3;
  m.fga.q_min = -0.3;
  m.fga.q_max = 2.3;
  m.fga.p_min = -1.6;
  m.fga.p_max = 1.6;

  m.ls.nx = even_round(std::max(100.0, 3.125 / eps));
  if (std::abs(eps - 1.0 / 256.0) < 1e-12) m.ls.nx = 768;
  m.ls.np = 40;
  m.ls.p_min = -2.0;
  m.ls.p_max = 2.0;
  m.ls.cfl_safety = 0.9;
  m.ls.kappa0 = 2;
  m.ls.kernel = DeltaKernelKind::cosine;
  return m;
}

MeshDefaults test2_meshes(double eps, double a, double b) {
  MeshDefaults m;
  m.tsfp.nx = even_round(std::max(512.0, 120.0 / eps));
  if (std::abs(eps - 1.0 / 128.0) < 1e-12) m.tsfp.nx = 7680;
  m.tsfp.dt_target = (b - a) / m.tsfp.nx / 20.0;

  m.fga.nx = even_round(std::max(96.0, 12.0 / eps));
  m.fga.dt_target = 5e-3;
  m.fga.nq = 56;
  m.fga.np = 32;
  m.fga.keep_threshold = 1e-3;
  const double root = std::sqrt(eps);
  m.fga.q_min = -1.0 - 0.46 - 5.5 * root;
  m.fga.q_max = -1.0 + 0.46 + 5.5 * root;
  // p-box half-width shrinks slower than sqrt(eps) so the truncated tail
  // keeps decaying as eps does
  const double lp = 0.84 * std::pow(16.0 * eps, 0.415);
  m.fga.p_min = 1.0 - lp;
  m.fga.p_max = 1.0 + lp;

  m.ls.nx = m.fga.nx;
  m.ls.np = 64;
  m.ls.p_min = -4.0;
  m.ls.p_max = 4.0;
  m.ls.cfl_safety = 0.9;
  m.ls.kappa0 = 2;
  m.ls.kernel = DeltaKernelKind::cosine;
  return m;
}

}  // namespace

ProblemSpec make_problem(ProblemId id, double eps, int d1) {
  if (!(eps > 0.0) || eps > 1.0)
    throw ConfigError("make_problem: eps must lie in (0,1]");
  if (d1 < 1) throw ConfigError("make_problem: d1 must be >= 1");

  ProblemSpec p;
  p.id = id;
  p.d1 = d1;
  p.eps = eps;

  switch (id) {
    case ProblemId::test1: {
      p.dim = 4 * d1;
      p.a = 0.0;
      p.b = 2.0;
      p.t_final = 0.5;
      p.p_range_min = -2.0;
      p.p_range_max = 2.0;
      p.potential = [](double, const RandomSample&) { return 10.0; };
      p.potential_dx = [](double, const RandomSample&) { return 0.0; };
      p.potential_dxx = [](double, const RandomSample&) { return 0.0; };
      p.wkb.n0 = [d1](double x, const RandomSample& z) {
        const double gp = group_sum(z, 0, d1);
        const double gq = group_sum(z, d1, d1);
        const double u = x - 1.0 + 0.2 * gq;
        return std::exp(-100.0 * (1.0 + 0.8 * gp) * u * u);
      };
      p.wkb.s0 = [d1](double x, const RandomSample& z) {
        const double gr = group_sum(z, 2 * d1, d1);
        const double gs = group_sum(z, 3 * d1, d1);
        const double ea = std::exp(5.0 * (x - 1.0 + 0.2 * gr));
        const double eb = std::exp(-5.0 * (x - 1.0 + 0.2 * gs));
        return -0.2 * std::log(ea + eb);
      };
      p.wkb.s0_x = [d1](double x, const RandomSample& z) {
        const double gr = group_sum(z, 2 * d1, d1);
        const double gs = group_sum(z, 3 * d1, d1);
        const double ea = std::exp(5.0 * (x - 1.0 + 0.2 * gr));
        const double eb = std::exp(-5.0 * (x - 1.0 + 0.2 * gs));
        return -(ea - eb) / (ea + eb);
      };
      p.meshes = test1_meshes(eps);
      break;
    }
    case ProblemId::test2a:
    case ProblemId::test2b_shift:
    case ProblemId::test2b_quadratic:
    case ProblemId::test2c_kl: {
      const bool random_potential =
          id == ProblemId::test2b_shift || id == ProblemId::test2b_quadratic;
      p.dim = random_potential ? 4 * d1 : 3 * d1;
      p.a = -M_PI;
      p.b = M_PI;
      p.t_final = 1.0;
      p.p_range_min = -4.0;
      p.p_range_max = 4.0;

      if (id == ProblemId::test2c_kl) {
        auto kl = std::make_shared<KLField>(
            kl_eigenpairs(0.5, 0.05, d1, std::max(8 * d1, 128), -M_PI, M_PI));
        p.kl = kl;
        // z_k are uniform on [-1,1]; the sqrt(3) factor rescales them to
        // unit variance.
        auto kl_sum = [kl, d1](double x, const RandomSample& z, int offset) {
          double s = 0.0;
          for (int k = 0; k < d1; ++k)
            s += std::sqrt(kl->eigvals[k]) * (std::sqrt(3.0) * z.z[offset + k]) *
                 kl->eval(k, x);
          return s;
        };
        const int d1c = d1;
        p.wkb.n0 = [kl_sum, eps, d1c](double x, const RandomSample& z) {
          const double ga = kl_sum(x, z, 0);
          const double gb = kl_sum(x, z, d1c);
          const double u = x + 1.0 - 0.4 * gb;
          return std::exp(-(1.0 + 0.6 * ga) * u * u / eps);
        };
        p.wkb.s0 = [kl_sum, d1c](double x, const RandomSample& z) {
          return x + 1.0 - 0.4 * kl_sum(x, z, 2 * d1c);
        };
        p.wkb.s0_x = nullptr;  // spectral fallback for the KL gradient
      } else {
        p.wkb.n0 = [d1, eps](double x, const RandomSample& z) {
          const double ga = group_sum(z, 0, d1);
          const double gb = group_sum(z, d1, d1);
          const double u = x + 1.0 - 0.4 * gb;
          return std::exp(-(1.0 + 0.6 * ga) * u * u / eps);
        };
        p.wkb.s0 = [d1](double x, const RandomSample& z) {
          return x + 1.0 - 0.4 * group_sum(z, 2 * d1, d1);
        };
        p.wkb.s0_x = [](double, const RandomSample&) { return 1.0; };
      }

      if (id == ProblemId::test2b_shift) {
        const int off = 3 * d1;
        p.potential = [off, d1](double x, const RandomSample& z) {
          return 0.5 * x * x + 0.5 * group_sum(z, off, d1);
        };
        p.potential_dx = [](double x, const RandomSample&) { return x; };
        p.potential_dxx = [](double, const RandomSample&) { return 1.0; };
      } else if (id == ProblemId::test2b_quadratic) {
        const int off = 3 * d1;
        auto coeff = [off, d1](const RandomSample& z) {
          double s = 0.0;
          for (int k = 1; k <= d1; ++k)
            s += z.z[off + k - 1] * k * k / 100.0;
          return s;
        };
        p.potential = [coeff](double x, const RandomSample& z) {
          return coeff(z) * x * x;
        };
        p.potential_dx = [coeff](double x, const RandomSample& z) {
          return 2.0 * coeff(z) * x;
        };
        p.potential_dxx = [coeff](double, const RandomSample& z) {
          return 2.0 * coeff(z);
        };
      } else {
        p.potential = [](double x, const RandomSample&) { return 0.5 * x * x; };
        p.potential_dx = [](double x, const RandomSample&) { return x; };
        p.potential_dxx = [](double, const RandomSample&) { return 1.0; };
      }
      p.meshes = test2_meshes(eps, p.a, p.b);
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Model factories

namespace {

double adjusted_dt(double t_final, double dt_target) {
  if (t_final <= 0.0) return dt_target;
  const int steps =
      std::max(1, static_cast<int>(std::ceil(t_final / dt_target - 1e-12)));
  return t_final / steps;
}

}  // namespace

FidelityModel make_model(const ProblemSpec& problem, const SolverConfig& sc,
                         const std::string& name) {
  FidelityModel model;
  model.name = name;
  model.dim = problem.dim;

  if (sc.kind == "tsfp") {
    const SpatialGrid1D grid = make_grid(problem.a, problem.b, sc.nx);
    model.grid = grid;
    const TsfpConfig cfg{sc.dt, problem.t_final};
    const PotentialFn v = problem.potential;
    const WkbData wkb = problem.wkb;
    const double eps = problem.eps;
    model.eval = [grid, cfg, v, wkb, eps](const RandomSample& z) {
      WaveField field = wkb_initial(wkb, z, eps, grid);
      field = tsfp_solve(field, v, z, cfg);
      return observables_from_wave(field);
    };
    return model;
  }

  if (sc.kind == "fga") {
    const SpatialGrid1D grid = make_grid(problem.a, problem.b, sc.nx);
    model.grid = grid;
    // the decomposition quadrature needs ~16 points per oscillation of the
    // initial phase, which can exceed the observable grid resolution
    int nx_dec = sc.nx_decompose;
    if (nx_dec <= 0)
      nx_dec = std::max(
          sc.nx, even_round(2.6 * (problem.b - problem.a) / problem.eps));
    const SpatialGrid1D dec_grid = make_grid(problem.a, problem.b, nx_dec);
    const PhaseSpaceBox box = sc.box;
    const int nq = sc.nq, np = sc.np_fga;
    const double thr = sc.keep_threshold;
    const double dt = sc.dt;
    const double t_final = problem.t_final;
    const WkbData wkb = problem.wkb;
    const double eps = problem.eps;
    const PotentialFn v0 = problem.potential;
    const PotentialFn v1 = problem.potential_dx;
    const PotentialFn v2 = problem.potential_dxx;
    model.eval = [=](const RandomSample& z) {
      const WaveField field = wkb_initial(wkb, z, eps, dec_grid);
      FGAEnsemble ens = fga_decompose(field, box, nq, np, thr);
      if (t_final > 0.0) {
        auto bv0 = [&v0, &z](double x) { return v0(x, z); };
        auto bv1 = [&v1, &z](double x) { return v1(x, z); };
        auto bv2 = [&v2, &z](double x) { return v2(x, z); };
        ens = fga_evolve(ens, bv0, bv1, bv2, dt, t_final);
      }
      const WaveField rec = fga_reconstruct(ens, grid);
      return observables_from_wave(rec);
    };
    return model;
  }

  if (sc.kind == "ls") {
    const SpatialGrid1D xgrid = make_grid(problem.a, problem.b, sc.nx);
    model.grid = xgrid;
    const PhaseGrid pgrid = make_phase_grid(xgrid, sc.p_min, sc.p_max, sc.np_ls);
    const DeltaKernelSpec kernel{sc.kernel, sc.kappa0 * pgrid.dp};
    const double t_final = problem.t_final;
    const WkbData wkb = problem.wkb;
    const PotentialFn v1 = problem.potential_dx;
    const double safety = sc.cfl_safety;
    const double dt_explicit = sc.dt_explicit ? sc.dt : 0.0;
    model.eval = [=](const RandomSample& z) {
      LevelSetState state = ls_init(wkb, z, pgrid);
      if (t_final > 0.0) {
        auto bv1 = [&v1, &z](double x) { return v1(x, z); };
        double dt = dt_explicit;
        if (dt <= 0.0)
          dt = adjusted_dt(t_final, cfl_timestep(pgrid, bv1, safety));
        state = ls_solve(state, bv1, dt, t_final);
      }
      return ls_observables(state, kernel);
    };
    return model;
  }

  throw ConfigError("make_model: unknown solver kind '" + sc.kind + "'");
}

// ---------------------------------------------------------------------------
// Setup resolution

namespace {

SolverConfig resolve_solver(const ResolvedConfig& cfg, ResolvedConfig& resolved,
                            const std::string& prefix, const ProblemSpec& problem,
                            const std::string& default_kind) {
  SolverConfig sc;
  sc.kind = cfg.get_or(prefix + ".kind", default_kind);
  resolved.set(prefix + ".kind", sc.kind);
  if (sc.kind == "none") return sc;

  const MeshDefaults& md = problem.meshes;
  auto geti = [&](const std::string& key, long long dflt) {
    long long v = cfg.has(key) ? cfg.get_int(key) : dflt;
    resolved.set(key, std::to_string(v));
    return v;
  };
  auto getr = [&](const std::string& key, double dflt) {
    double v = cfg.has(key) ? cfg.get_real(key) : dflt;
    resolved.set(key, format_double(v));
    return v;
  };

  if (sc.kind == "tsfp") {
    sc.nx = static_cast<int>(geti(prefix + ".nx", md.tsfp.nx));
    const double dflt_dt = adjusted_dt(problem.t_final, md.tsfp.dt_target);
    sc.dt = getr(prefix + ".dt", dflt_dt);
    sc.dt_explicit = cfg.has(prefix + ".dt");
  } else if (sc.kind == "fga") {
    sc.nx = static_cast<int>(geti(prefix + ".nx", md.fga.nx));
    sc.dt = getr(prefix + ".dt", adjusted_dt(problem.t_final, md.fga.dt_target));
    sc.dt_explicit = cfg.has(prefix + ".dt");
    sc.nq = static_cast<int>(geti(prefix + ".nq", md.fga.nq));
    sc.np_fga = static_cast<int>(geti(prefix + ".np", md.fga.np));
    sc.nx_decompose = static_cast<int>(geti(prefix + ".nx_decompose", 0));
    sc.keep_threshold = getr(prefix + ".keep_threshold", md.fga.keep_threshold);
    sc.box.q_min = getr(prefix + ".q_min", md.fga.q_min);
    sc.box.q_max = getr(prefix + ".q_max", md.fga.q_max);
    sc.box.p_min = getr(prefix + ".p_min", md.fga.p_min);
    sc.box.p_max = getr(prefix + ".p_max", md.fga.p_max);
  } else if (sc.kind == "ls") {
    sc.nx = static_cast<int>(geti(prefix + ".nx", md.ls.nx));
    sc.np_ls = static_cast<int>(geti(prefix + ".np", md.ls.np));
    sc.p_min = getr(prefix + ".p_min", md.ls.p_min);
    sc.p_max = getr(prefix + ".p_max", md.ls.p_max);
    sc.cfl_safety = getr(prefix + ".cfl_safety", md.ls.cfl_safety);
    sc.kappa0 = static_cast<int>(geti(prefix + ".kappa0", md.ls.kappa0));
    const std::string kernel = cfg.get_or(prefix + ".kernel",
                                          md.ls.kernel == DeltaKernelKind::cosine
                                              ? "cosine"
                                              : "linear");
    resolved.set(prefix + ".kernel", kernel);
    if (kernel == "cosine")
      sc.kernel = DeltaKernelKind::cosine;
    else if (kernel == "linear")
      sc.kernel = DeltaKernelKind::piecewise_linear;
    else
      throw ConfigError("key '" + prefix + ".kernel' must be linear or cosine");
    if (cfg.has(prefix + ".dt")) {
      sc.dt = cfg.get_real(prefix + ".dt");
      sc.dt_explicit = true;
      resolved.set(prefix + ".dt", format_double(sc.dt));
      // validate against the CFL bound at z = 0
      const SpatialGrid1D xg = make_grid(problem.a, problem.b, sc.nx);
      const PhaseGrid pg = make_phase_grid(xg, sc.p_min, sc.p_max, sc.np_ls);
      RandomSample z0;
      z0.z.assign(problem.dim, 0.0);
      auto bv1 = [&](double x) { return problem.potential_dx(x, z0); };
      const double bound = cfl_timestep(pg, bv1, 1.0);
      if (sc.dt > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "key '" << prefix << ".dt' = " << sc.dt
           << " violates the CFL bound " << bound << " for the configured mesh";
        throw ConfigError(os.str());
      }
    }
  } else {
    throw ConfigError("key '" + prefix + ".kind' must be tsfp, fga, ls or none");
  }

  if (sc.nx < 4 || sc.nx % 2 != 0)
    throw ConfigError("key '" + prefix + ".nx' must be even and >= 4");
  if (sc.kind != "ls" && sc.dt_explicit && problem.t_final > 0.0) {
    const double q = problem.t_final / sc.dt;
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
      throw ConfigError("key '" + prefix + ".dt' must divide problem.t_final");
  }
  return sc;
}

}  // namespace

ExperimentSetup make_setup(const ResolvedConfig& cfg) {
  ExperimentSetup setup;
  ResolvedConfig resolved = cfg;

  const std::string id_str = cfg.get("problem.id");
  const ProblemId id = problem_id_from_string(id_str);
  const double eps = cfg.get_real("problem.eps");
  const int d1 = static_cast<int>(cfg.has("problem.d1") ? cfg.get_int("problem.d1") : 5);
  setup.problem = make_problem(id, eps, d1);
  if (cfg.has("problem.t_final"))
    setup.problem.t_final = cfg.get_real("problem.t_final");
  resolved.set("problem.id", id_str);
  resolved.set("problem.eps", format_double(eps));
  resolved.set("problem.d1", std::to_string(d1));
  resolved.set("problem.t_final", format_double(setup.problem.t_final));

  setup.low = resolve_solver(cfg, resolved, "fidelity.low", setup.problem, "fga");
  setup.medium =
      resolve_solver(cfg, resolved, "fidelity.medium", setup.problem, "none");
  setup.high = resolve_solver(cfg, resolved, "fidelity.high", setup.problem, "tsfp");
  setup.has_medium = setup.medium.kind != "none";
  if (setup.low.kind == "none" || setup.high.kind == "none")
    throw ConfigError("fidelity.low and fidelity.high must not be none");

  auto geti = [&](const std::string& key, long long dflt) {
    long long v = cfg.has(key) ? cfg.get_int(key) : dflt;
    resolved.set(key, std::to_string(v));
    return v;
  };
  auto getr = [&](const std::string& key, double dflt) {
    double v = cfg.has(key) ? cfg.get_real(key) : dflt;
    resolved.set(key, format_double(v));
    return v;
  };
  setup.m_train = static_cast<int>(geti("uq.M", 200));
  setup.n_test = static_cast<int>(geti("uq.N", 100));
  setup.k_max = static_cast<int>(geti("uq.k_max", 10));
  setup.tol = getr("uq.tol", 1e-12);
  setup.seed = static_cast<std::uint64_t>(geti("uq.seed", 1234));
  if (setup.m_train < 1 || setup.n_test < 1)
    throw ConfigError("uq.M and uq.N must be >= 1");
  if (setup.k_max < 1 || setup.k_max > setup.m_train)
    throw ConfigError("uq.k_max must lie in [1, uq.M]");

  const std::string dir = cfg.get_or("outputs.dir", "out");
  resolved.set("outputs.dir", dir);
  setup.bounds = cfg.has("outputs.bounds") ? cfg.get_bool("outputs.bounds") : false;
  resolved.set("outputs.bounds", setup.bounds ? "true" : "false");

  setup.sc_enabled = cfg.has("sc.enabled") ? cfg.get_bool("sc.enabled") : false;
  resolved.set("sc.enabled", setup.sc_enabled ? "true" : "false");
  if (setup.sc_enabled) {
    for (long long v : cfg.get_int_list("sc.n_c_list"))
      setup.sc_n_c.push_back(static_cast<int>(v));
    setup.sc_n_ref = static_cast<int>(cfg.get_int("sc.n_ref"));
    for (int v : setup.sc_n_c)
      if (v < 1 || v >= setup.sc_n_ref)
        throw ConfigError("sc.n_c_list entries must satisfy 1 <= n_c < sc.n_ref");
  }

  setup.resolved = resolved;
  return setup;
}

// ---------------------------------------------------------------------------
// Experiment runner

namespace {

struct OutputGuard {
  std::vector<std::string> files;
  bool committed = false;

  ~OutputGuard() {
    if (committed) return;
    for (const auto& f : files) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
};

}  // namespace

ExperimentResult run_experiment(const ExperimentSetup& setup,
                                const std::string& out_dir) {
  fs::create_directories(out_dir);
  ExperimentResult result;
  OutputGuard guard;
  std::string stage = "setup";

  try {
    const FidelityModel low = make_model(setup.problem, setup.low, "low");
    std::optional<FidelityModel> medium;
    if (setup.has_medium)
      medium = make_model(setup.problem, setup.medium, "medium");
    const FidelityModel high = make_model(setup.problem, setup.high, "high");

    stage = "offline";
    const auto training =
        sample_uniform(setup.problem.dim, setup.m_train, setup.seed);
    SurrogatePipeline pipe =
        offline_build(low, medium, high, training, setup.k_max, setup.tol);
    const int K = pipe.k();

    stage = "test-reference";
    const auto test =
        sample_uniform(setup.problem.dim, setup.n_test, setup.seed + 1);
    std::vector<ObservablePair> refs(test.size());
    {
      const auto start = std::chrono::steady_clock::now();
      parallel_for(0, static_cast<int>(test.size()),
                   [&](int i) { refs[i] = high.eval(test[i]); });
      const std::chrono::duration<double> dt =
          std::chrono::steady_clock::now() - start;
      pipe.timings.seconds_high += dt.count();
      pipe.timings.evals_high += static_cast<int>(test.size());
    }

    stage = "sweep";
    const FidelityModel& inference = pipe.inference_model();
    std::vector<ObservablePair> inf_obs(test.size());
    {
      const auto start = std::chrono::steady_clock::now();
      parallel_for(0, static_cast<int>(test.size()),
                   [&](int i) { inf_obs[i] = inference.eval(test[i]); });
      const std::chrono::duration<double> dt =
          std::chrono::steady_clock::now() - start;
      if (pipe.mode == SurrogateMode::trifidelity) {
        pipe.timings.seconds_medium += dt.count();
        pipe.timings.evals_medium += static_cast<int>(test.size());
      } else {
        pipe.timings.seconds_low += dt.count();
        pipe.timings.evals_low += static_cast<int>(test.size());
      }
    }

    std::vector<std::vector<double>> ref_rho(test.size()), ref_cur(test.size());
    for (size_t i = 0; i < test.size(); ++i) {
      ref_rho[i] = refs[i].rho;
      ref_cur[i] = refs[i].current;
    }

    // true per-sample relative errors at each prefix r, reused by the bounds
    std::vector<std::vector<double>> rel_rho(K), rel_cur(K);
    for (int r = 1; r <= K; ++r) {
      std::vector<std::vector<double>> sur_rho(test.size()), sur_cur(test.size());
      std::vector<double> rr(test.size()), rc(test.size());
      parallel_for(0, static_cast<int>(test.size()), [&](int i) {
        const ObservablePair sur = surrogate_evaluate_prefix(pipe, inf_obs[i], r);
        sur_rho[i] = sur.rho;
        sur_cur[i] = sur.current;
        rr[i] = relative_l2_error(sur.rho, refs[i].rho, pipe.ip_weight_high);
        rc[i] =
            relative_l2_error(sur.current, refs[i].current, pipe.ip_weight_high);
      });
      result.err_rho.push_back(mean_l2_error(ref_rho, sur_rho));
      result.err_current.push_back(mean_l2_error(ref_cur, sur_cur));
      rel_rho[r - 1] = rr;
      rel_cur[r - 1] = rc;
    }

    stage = "write-errors";
    {
      Table t;
      t.names = {"k", "err_rho", "err_current"};
      t.cols.resize(3);
      for (int r = 1; r <= K; ++r) {
        t.cols[0].push_back(r);
        t.cols[1].push_back(result.err_rho[r - 1]);
        t.cols[2].push_back(result.err_current[r - 1]);
      }
      const std::string path = (fs::path(out_dir) / "errors.csv").string();
      emit_csv(t, path);
      guard.files.push_back(path);
      result.files_written.push_back(path);
    }

    double coverage_rho = -1.0, coverage_cur = -1.0;
    if (setup.bounds && K >= 2) {
      stage = "bounds";
      Table t;
      t.names = {"k", "err_rho", "err_current", "bound_rho", "bound_current"};
      t.cols.resize(5);
      for (int k = 1; k < K; ++k) {
        const BoundReport rep = empirical_bound_report(
            pipe, test, k, rel_rho[k - 1], rel_cur[k - 1]);
        t.cols[0].push_back(k);
        t.cols[1].push_back(result.err_rho[k - 1]);
        t.cols[2].push_back(result.err_current[k - 1]);
        t.cols[3].push_back(rep.bound_rho);
        t.cols[4].push_back(rep.bound_current);
        result.bound_rho.push_back(rep.bound_rho);
        result.bound_current.push_back(rep.bound_current);
        if (k == K - 1) {
          coverage_rho = rep.coverage_rho;
          coverage_cur = rep.coverage_current;
        }
      }
      const std::string path = (fs::path(out_dir) / "bounds.csv").string();
      emit_csv(t, path);
      guard.files.push_back(path);
      result.files_written.push_back(path);
    }

    if (setup.sc_enabled) {
      stage = "sc-table";
      const ScTable table = sc_error_table(high, setup.sc_n_c, setup.sc_n_ref);
      Table t;
      t.names = {"n_c", "err_rho", "err_current"};
      t.cols.resize(3);
      for (size_t i = 0; i < table.n_c.size(); ++i) {
        t.cols[0].push_back(table.n_c[i]);
        t.cols[1].push_back(table.err_rho[i]);
        t.cols[2].push_back(table.err_current[i]);
      }
      const std::string path = (fs::path(out_dir) / "sc_table.csv").string();
      emit_csv(t, path);
      guard.files.push_back(path);
      result.files_written.push_back(path);
    }

    stage = "archive";
    {
      const std::string path = (fs::path(out_dir) / "pipeline.json").string();
      save_pipeline(pipe, path);
      guard.files.push_back(path);
      result.files_written.push_back(path);
    }

    stage = "manifest";
    {
      nlohmann::json manifest;
      manifest["version"] = kVersion;
      manifest["verb"] = "experiment";
      manifest["seed"] = setup.seed;
      manifest["config_hash"] = config_hash(setup.resolved);
      nlohmann::json cfg_json;
      for (const auto& [k, v] : setup.resolved.values) cfg_json[k] = v;
      manifest["config"] = cfg_json;
      manifest["selected_k"] = K;
      manifest["timings"] = {
          {"seconds_low", pipe.timings.seconds_low},
          {"seconds_medium", pipe.timings.seconds_medium},
          {"seconds_high", pipe.timings.seconds_high},
          {"evals_low", pipe.timings.evals_low},
          {"evals_medium", pipe.timings.evals_medium},
          {"evals_high", pipe.timings.evals_high},
      };
      if (coverage_rho >= 0.0) {
        manifest["bound_coverage_rho"] = coverage_rho;
        manifest["bound_coverage_current"] = coverage_cur;
      }
      const std::string path = (fs::path(out_dir) / "manifest.json").string();
      std::ofstream out(path, std::ios::binary);
      out << manifest.dump(2) << "\n";
      if (!out) throw NumericError("cannot write manifest");
      guard.files.push_back(path);
      result.files_written.push_back(path);
      result.timings = pipe.timings;
    }

    guard.committed = true;
    return result;
  } catch (const std::exception& e) {
    throw NumericError("experiment stage '" + stage + "' failed: " + e.what());
  }
}

}  // namespace mfs
