// mfschrod command-line front end.
//
// Verbs: solve | offline | online | experiment | bound | sc-table | diagnose
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mfschrod/archive.hpp"
#include "mfschrod/config.hpp"
#include "mfschrod/csv.hpp"
#include "mfschrod/errors.hpp"
#include "mfschrod/experiments.hpp"
#include "mfschrod/metrics.hpp"
#include "mfschrod/parallel.hpp"
#include "mfschrod/rng.hpp"
#include "mfschrod/version.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;  // overrides outputs.dir when nonempty
  int threads = 0;
};

mfs::ResolvedConfig load_config(const CommonArgs& args) {
  mfs::ResolvedConfig cfg = mfs::parse_config_file(args.config_path);
  for (const auto& ov : args.overrides) mfs::apply_override(cfg, ov);
  if (!args.out_dir.empty()) cfg.set("outputs.dir", args.out_dir);
  return cfg;
}

void write_manifest(const mfs::ExperimentSetup& setup, const std::string& verb,
                    const std::string& out_dir,
                    const nlohmann::json& extra = {}) {
  nlohmann::json manifest;
  manifest["version"] = mfs::kVersion;
  manifest["verb"] = verb;
  manifest["seed"] = setup.seed;
  manifest["config_hash"] = mfs::config_hash(setup.resolved);
  nlohmann::json cfg_json;
  for (const auto& [k, v] : setup.resolved.values) cfg_json[k] = v;
  manifest["config"] = cfg_json;
  for (auto it = extra.begin(); it != extra.end(); ++it)
    manifest[it.key()] = it.value();
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << "\n";
  if (!out) throw mfs::NumericError("cannot write manifest.json");
}

mfs::RandomSample parse_z(const std::string& text, int dim) {
  mfs::RandomSample z;
  if (text == "zero") {
    z.z.assign(dim, 0.0);
    return z;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) z.z.push_back(std::stod(item));
  if (static_cast<int>(z.z.size()) != dim)
    throw mfs::ConfigError("z has " + std::to_string(z.z.size()) +
                           " components, problem needs " + std::to_string(dim));
  return z;
}

void write_observables_csv(const mfs::ObservablePair& obs,
                           const std::string& path) {
  mfs::Table t;
  t.names = {"x", "rho", "current"};
  t.cols.resize(3);
  for (int j = 0; j < obs.grid.n; ++j) {
    t.cols[0].push_back(obs.grid.node(j));
    t.cols[1].push_back(obs.rho[j]);
    t.cols[2].push_back(obs.current[j]);
  }
  mfs::emit_csv(t, path);
}

int run_solve(const CommonArgs& args) {
  const mfs::ResolvedConfig cfg = load_config(args);
  mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  fs::create_directories(out_dir);

  const std::string which = cfg.get_or("solve.fidelity", "high");
  setup.resolved.set("solve.fidelity", which);
  const std::string ztext = cfg.get_or("solve.z", "zero");
  setup.resolved.set("solve.z", ztext);

  const mfs::SolverConfig* sc = nullptr;
  if (which == "high") sc = &setup.high;
  else if (which == "low") sc = &setup.low;
  else if (which == "medium" && setup.has_medium) sc = &setup.medium;
  else throw mfs::ConfigError("solve.fidelity must name a configured fidelity");

  const mfs::FidelityModel model = mfs::make_model(setup.problem, *sc, which);
  const mfs::RandomSample z = parse_z(ztext, setup.problem.dim);
  const mfs::ObservablePair obs = model.eval(z);
  const std::string path =
      (fs::path(out_dir) / ("solve_" + which + ".csv")).string();
  write_observables_csv(obs, path);
  write_manifest(setup, "solve", out_dir, {{"output", path}});
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_offline(const CommonArgs& args) {
  const mfs::ResolvedConfig cfg = load_config(args);
  mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  fs::create_directories(out_dir);

  const mfs::FidelityModel low = mfs::make_model(setup.problem, setup.low, "low");
  std::optional<mfs::FidelityModel> medium;
  if (setup.has_medium)
    medium = mfs::make_model(setup.problem, setup.medium, "medium");
  const mfs::FidelityModel high =
      mfs::make_model(setup.problem, setup.high, "high");

  const auto training =
      mfs::sample_uniform(setup.problem.dim, setup.m_train, setup.seed);
  const mfs::SurrogatePipeline pipe =
      mfs::offline_build(low, medium, high, training, setup.k_max, setup.tol);

  const std::string path = (fs::path(out_dir) / "pipeline.json").string();
  mfs::save_pipeline(pipe, path);
  write_manifest(setup, "offline", out_dir,
                 {{"archive", path}, {"selected_k", pipe.k()}});
  std::cout << "selected " << pipe.k() << " points; wrote " << path << "\n";
  return 0;
}

int run_online(const CommonArgs& args) {
  const mfs::ResolvedConfig cfg = load_config(args);
  mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  fs::create_directories(out_dir);

  const std::string archive = cfg.get_or(
      "online.archive", (fs::path(out_dir) / "pipeline.json").string());
  setup.resolved.set("online.archive", archive);
  const std::string ztext = cfg.get_or("online.z", "zero");
  setup.resolved.set("online.z", ztext);

  const mfs::FidelityModel low = mfs::make_model(setup.problem, setup.low, "low");
  std::optional<mfs::FidelityModel> medium;
  if (setup.has_medium)
    medium = mfs::make_model(setup.problem, setup.medium, "medium");
  const mfs::FidelityModel high =
      mfs::make_model(setup.problem, setup.high, "high");

  const mfs::SurrogatePipeline pipe =
      mfs::load_pipeline(archive, low, medium, high);
  const mfs::RandomSample z = parse_z(ztext, setup.problem.dim);
  const mfs::ObservablePair obs = mfs::surrogate_evaluate(pipe, z);
  const std::string path = (fs::path(out_dir) / "surrogate.csv").string();
  write_observables_csv(obs, path);
  write_manifest(setup, "online", out_dir, {{"output", path}});
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_experiment_verb(const CommonArgs& args, bool force_bounds) {
  mfs::ResolvedConfig cfg = load_config(args);
  if (force_bounds) cfg.set("outputs.bounds", "true");
  const mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  const mfs::ExperimentResult result = mfs::run_experiment(setup, out_dir);
  for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
  return 0;
}

int run_sc_table(const CommonArgs& args) {
  mfs::ResolvedConfig cfg = load_config(args);
  cfg.set("sc.enabled", "true");
  mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  fs::create_directories(out_dir);

  const mfs::FidelityModel high =
      mfs::make_model(setup.problem, setup.high, "high");
  const mfs::ScTable table =
      mfs::sc_error_table(high, setup.sc_n_c, setup.sc_n_ref);
  mfs::Table t;
  t.names = {"n_c", "err_rho", "err_current"};
  t.cols.resize(3);
  for (size_t i = 0; i < table.n_c.size(); ++i) {
    t.cols[0].push_back(table.n_c[i]);
    t.cols[1].push_back(table.err_rho[i]);
    t.cols[2].push_back(table.err_current[i]);
  }
  const std::string path = (fs::path(out_dir) / "sc_table.csv").string();
  mfs::emit_csv(t, path);
  write_manifest(setup, "sc-table", out_dir, {{"output", path}});
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_diagnose(const CommonArgs& args) {
  const mfs::ResolvedConfig cfg = load_config(args);
  mfs::ExperimentSetup setup = mfs::make_setup(cfg);
  const std::string out_dir = setup.resolved.get("outputs.dir");
  fs::create_directories(out_dir);

  std::vector<double> eps_list{0.1, 0.05, 0.025};
  if (cfg.has("diagnose.eps_list")) eps_list = cfg.get_real_list("diagnose.eps_list");
  const double dz = cfg.has("diagnose.dz") ? cfg.get_real("diagnose.dz") : 1e-4;
  const int direction = cfg.has("diagnose.direction")
                            ? static_cast<int>(cfg.get_int("diagnose.direction"))
                            : 2 * setup.problem.d1;  // first phase-group slot
  {
    std::string eps_str;
    for (size_t i = 0; i < eps_list.size(); ++i)
      eps_str += (i ? "," : "") + mfs::format_double(eps_list[i]);
    setup.resolved.set("diagnose.eps_list", eps_str);
    setup.resolved.set("diagnose.dz", mfs::format_double(dz));
    setup.resolved.set("diagnose.direction", std::to_string(direction));
  }

  const mfs::ProblemId id = setup.problem.id;
  const int d1 = setup.problem.d1;
  const double t_final = setup.problem.t_final;
  auto factory = [&](double eps) {
    mfs::ProblemSpec p = mfs::make_problem(id, eps, d1);
    p.t_final = t_final;
    mfs::SolverConfig sc;
    sc.kind = "tsfp";
    sc.nx = p.meshes.tsfp.nx;
    const int steps = std::max(
        1, static_cast<int>(std::ceil(t_final / p.meshes.tsfp.dt_target)));
    sc.dt = t_final / steps;
    return mfs::make_model(p, sc, "diagnose");
  };
  const std::vector<double> norms =
      mfs::rho_z_diagnostic(factory, eps_list, dz, direction);

  mfs::Table t;
  t.names = {"eps", "rho_z_norm"};
  t.cols.resize(2);
  for (size_t i = 0; i < eps_list.size(); ++i) {
    t.cols[0].push_back(eps_list[i]);
    t.cols[1].push_back(norms[i]);
  }
  const std::string path = (fs::path(out_dir) / "rho_z.csv").string();
  mfs::emit_csv(t, path);
  write_manifest(setup, "diagnose", out_dir, {{"output", path}});
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity solvers for the 1D semiclassical Schrodinger "
               "equation with random inputs"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string verb;
  for (const char* name : {"solve", "offline", "online", "experiment", "bound",
                           "sc-table", "diagnose"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "Path to the config file")
        ->required();
    sub->add_option("--set", args.overrides, "Override key=value")
        ->take_all();
    sub->add_option("--out", args.out_dir, "Output directory");
    sub->add_option("--threads", args.threads, "Worker threads (default: all)");
    sub->callback([&verb, name]() { verb = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (args.threads > 0) mfs::set_num_threads(args.threads);
    if (verb == "solve") return run_solve(args);
    if (verb == "offline") return run_offline(args);
    if (verb == "online") return run_online(args);
    if (verb == "experiment") return run_experiment_verb(args, false);
    if (verb == "bound") return run_experiment_verb(args, true);
    if (verb == "sc-table") return run_sc_table(args);
    if (verb == "diagnose") return run_diagnose(args);
    std::cerr << "unknown verb\n";
    return 2;
  } catch (const mfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
