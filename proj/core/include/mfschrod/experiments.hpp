#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfschrod/config.hpp"
#include "mfschrod/fga.hpp"
#include "mfschrod/grid.hpp"
#include "mfschrod/levelset.hpp"
#include "mfschrod/multifidelity.hpp"
#include "mfschrod/tsfp.hpp"

namespace mfs {

enum class ProblemId { test1, test2a, test2b_shift, test2b_quadratic, test2c_kl };

ProblemId problem_id_from_string(const std::string& s);
std::string to_string(ProblemId id);

// Karhunen-Loeve eigenpairs of the squared-exponential covariance
// c(x-y) = sigma^2 exp(-|x-y|^2/l^2), by Nystrom discretization on a
// Gauss-Legendre grid. Eigenvalues descend; eigenfunctions have unit L2 norm.
struct KLField {
  double l = 0.0;
  double sigma = 0.0;
  std::vector<double> eigvals;
  Eigen::MatrixXd eigfuncs;  // column k = phi_k at the quadrature nodes
  std::vector<double> nodes;
  std::vector<double> weights;

  // Nystrom extension of phi_k to arbitrary x.
  double eval(int k, double x) const;
};

KLField kl_eigenpairs(double l, double sigma, int d1, int nq, double a, double b);

// Per-fidelity mesh defaults resolved from (problem, eps).
struct FgaMeshDefaults {
  int nx = 0;
  double dt_target = 0.0;
  int nq = 0, np = 0;
  double keep_threshold = 0.0;
  double q_min = 0.0, q_max = 0.0, p_min = 0.0, p_max = 0.0;
};

struct LsMeshDefaults {
  int nx = 0;
  int np = 0;
  double p_min = 0.0, p_max = 0.0;
  double cfl_safety = 0.0;
  int kappa0 = 0;
  DeltaKernelKind kernel = DeltaKernelKind::cosine;
};

struct TsfpMeshDefaults {
  int nx = 0;
  double dt_target = 0.0;
};

struct MeshDefaults {
  TsfpMeshDefaults tsfp;
  FgaMeshDefaults fga;
  LsMeshDefaults ls;
};

// Fully parameterized experiment problem: domain, potential (with analytic
// x-derivatives), WKB data, random dimension and solver mesh defaults.
struct ProblemSpec {
  ProblemId id = ProblemId::test1;
  int d1 = 0;
  int dim = 0;  // total random dimension
  double eps = 0.0;
  double a = 0.0, b = 0.0;
  double t_final = 0.0;
  double p_range_min = 0.0, p_range_max = 0.0;
  PotentialFn potential;
  PotentialFn potential_dx;
  PotentialFn potential_dxx;
  WkbData wkb;
  MeshDefaults meshes;
  std::shared_ptr<const KLField> kl;  // test2c only
};

ProblemSpec make_problem(ProblemId id, double eps, int d1);

// Concrete solver configuration for one fidelity level.
struct SolverConfig {
  std::string kind;  // "tsfp", "fga", "ls", "none"
  int nx = 0;
  double dt = 0.0;  // tsfp/fga; adjusted so t_final/dt is an integer
  // fga
  int nq = 0, np_fga = 0;
  int nx_decompose = 0;  // 0 = choose from eps (finer than nx if needed)
  double keep_threshold = 0.0;
  PhaseSpaceBox box{};
  // ls
  int np_ls = 0;
  double p_min = 0.0, p_max = 0.0;
  double cfl_safety = 0.0;
  int kappa0 = 0;
  DeltaKernelKind kernel = DeltaKernelKind::cosine;
  bool dt_explicit = false;
};

FidelityModel make_model(const ProblemSpec& problem, const SolverConfig& sc,
                         const std::string& name);

// Everything run_experiment needs, derived from a ResolvedConfig with
// defaults filled in and constraints validated (throws ConfigError on
// violations such as a CFL-incompatible dt).
struct ExperimentSetup {
  ProblemSpec problem;
  SolverConfig low, medium, high;
  bool has_medium = false;
  int m_train = 0;
  int n_test = 0;
  int k_max = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  bool bounds = false;
  std::vector<int> sc_n_c;
  int sc_n_ref = 0;
  bool sc_enabled = false;
  ResolvedConfig resolved;
};

ExperimentSetup make_setup(const ResolvedConfig& cfg);

struct ExperimentResult {
  std::vector<double> err_rho;      // index r-1 holds the error with r runs
  std::vector<double> err_current;
  std::vector<double> bound_rho;    // empty unless bounds enabled
  std::vector<double> bound_current;
  std::vector<std::string> files_written;
  ModelTimings timings;
};

// Offline build, error sweep r = 1..K on an independent test set, optional
// empirical bounds and SC table; writes errors.csv (+ bounds.csv,
// sc_table.csv) and manifest.json under out_dir. Any stage failure removes
// partial outputs and rethrows naming the stage.
ExperimentResult run_experiment(const ExperimentSetup& setup,
                                const std::string& out_dir);

}  // namespace mfs
