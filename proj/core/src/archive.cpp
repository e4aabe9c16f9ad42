#include "mfschrod/archive.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "mfschrod/errors.hpp"

namespace mfs {

namespace {

using nlohmann::json;

json model_meta(const FidelityModel& m) {
  return json{{"name", m.name},
              {"dim", m.dim},
              {"grid", {{"a", m.grid.a}, {"b", m.grid.b}, {"n", m.grid.n}}}};
}

void check_model(const json& meta, const FidelityModel& m, const char* slot) {
  const bool ok = meta.at("name") == m.name && meta.at("dim") == m.dim &&
                  meta.at("grid").at("a") == m.grid.a &&
                  meta.at("grid").at("b") == m.grid.b &&
                  meta.at("grid").at("n") == m.grid.n;
  if (!ok)
    throw ConfigError(std::string("pipeline archive: stored ") + slot +
                      " model metadata does not match the supplied model");
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

std::vector<std::vector<double>> matrix_from(const json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
  return out;
}

}  // namespace

void save_pipeline(const SurrogatePipeline& pipe, const std::string& path) {
  json doc;
  doc["format"] = "mfschrod-pipeline";
  doc["format_version"] = 1;
  doc["mode"] =
      pipe.mode == SurrogateMode::trifidelity ? "trifidelity" : "bifidelity";
  doc["ip_weight_inference"] = pipe.ip_weight_inference;
  doc["ip_weight_high"] = pipe.ip_weight_high;
  doc["low"] = model_meta(pipe.low);
  if (pipe.medium) doc["medium"] = model_meta(*pipe.medium);
  doc["high"] = model_meta(pipe.high);

  json training = json::array();
  for (const auto& s : pipe.training) training.push_back(s.z);
  doc["training"] = training;
  doc["selection"] = {{"indices", pipe.selection.indices},
                      {"residuals", pipe.selection.residuals}};
  doc["rho"] = {{"basis", matrix_json(pipe.rho_sys.basis)},
                {"high", matrix_json(pipe.rho_sys.high)}};
  doc["current"] = {{"basis", matrix_json(pipe.cur_sys.basis)},
                    {"high", matrix_json(pipe.cur_sys.high)}};
  doc["timings"] = {{"seconds_low", pipe.timings.seconds_low},
                    {"seconds_medium", pipe.timings.seconds_medium},
                    {"seconds_high", pipe.timings.seconds_high},
                    {"evals_low", pipe.timings.evals_low},
                    {"evals_medium", pipe.timings.evals_medium},
                    {"evals_high", pipe.timings.evals_high}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("save_pipeline: cannot open " + path);
  out << doc.dump() << "\n";
  if (!out) throw NumericError("save_pipeline: write failed for " + path);
}

SurrogatePipeline load_pipeline(const std::string& path,
                                const FidelityModel& low,
                                const std::optional<FidelityModel>& medium,
                                const FidelityModel& high) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_pipeline: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("load_pipeline: malformed archive: ") +
                      e.what());
  }
  if (doc.value("format", "") != "mfschrod-pipeline" ||
      doc.value("format_version", 0) != 1)
    throw ConfigError("load_pipeline: unsupported archive format");

  SurrogatePipeline pipe;
  const std::string mode = doc.at("mode");
  pipe.mode = mode == "trifidelity" ? SurrogateMode::trifidelity
                                    : SurrogateMode::bifidelity;
  if (pipe.mode == SurrogateMode::trifidelity && !medium)
    throw ConfigError("load_pipeline: trifidelity archive needs a medium model");
  check_model(doc.at("low"), low, "low");
  if (pipe.mode == SurrogateMode::trifidelity)
    check_model(doc.at("medium"), *medium, "medium");
  check_model(doc.at("high"), high, "high");
  pipe.low = low;
  pipe.medium = medium;
  pipe.high = high;
  pipe.ip_weight_inference = doc.at("ip_weight_inference");
  pipe.ip_weight_high = doc.at("ip_weight_high");

  for (const auto& zj : doc.at("training")) {
    RandomSample s;
    s.z = zj.get<std::vector<double>>();
    pipe.training.push_back(s);
  }
  pipe.selection.indices = doc.at("selection").at("indices").get<std::vector<int>>();
  pipe.selection.residuals =
      doc.at("selection").at("residuals").get<std::vector<double>>();

  auto fill = [&](QuantitySystem& q, const json& j) {
    q.basis = matrix_from(j.at("basis"));
    q.high = matrix_from(j.at("high"));
    SnapshotMatrix m;
    m.columns = q.basis;
    m.samples.resize(q.basis.size());
    m.ip_weight = pipe.ip_weight_inference;
    std::vector<int> all(q.basis.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    q.sys = assemble_gramian(m, all);
  };
  fill(pipe.rho_sys, doc.at("rho"));
  fill(pipe.cur_sys, doc.at("current"));

  if (doc.contains("timings")) {
    const auto& t = doc["timings"];
    pipe.timings.seconds_low = t.value("seconds_low", 0.0);
    pipe.timings.seconds_medium = t.value("seconds_medium", 0.0);
    pipe.timings.seconds_high = t.value("seconds_high", 0.0);
    pipe.timings.evals_low = t.value("evals_low", 0);
    pipe.timings.evals_medium = t.value("evals_medium", 0);
    pipe.timings.evals_high = t.value("evals_high", 0);
  }
  return pipe;
}

}  // namespace mfs
