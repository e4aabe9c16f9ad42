#include "mfschrod/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mfschrod/errors.hpp"

namespace mfs {

namespace {

enum class KeyType { string, integer, real, boolean, real_list, int_list };

struct KeySpec {
  const char* key;
  KeyType type;
};

// Canonical schema; anything else is rejected.
constexpr std::array<KeySpec, 52> kSchema{{
    {"problem.id", KeyType::string},
    {"problem.eps", KeyType::real},
    {"problem.d1", KeyType::integer},
    {"problem.t_final", KeyType::real},
    {"fidelity.low.kind", KeyType::string},
    {"fidelity.low.nx", KeyType::integer},
    {"fidelity.low.dt", KeyType::real},
    {"fidelity.low.nq", KeyType::integer},
    {"fidelity.low.np", KeyType::integer},
    {"fidelity.low.nx_decompose", KeyType::integer},
    {"fidelity.low.keep_threshold", KeyType::real},
    {"fidelity.low.q_min", KeyType::real},
    {"fidelity.low.q_max", KeyType::real},
    {"fidelity.low.p_min", KeyType::real},
    {"fidelity.low.p_max", KeyType::real},
    {"fidelity.low.cfl_safety", KeyType::real},
    {"fidelity.low.kappa0", KeyType::integer},
    {"fidelity.low.kernel", KeyType::string},
    {"fidelity.medium.kind", KeyType::string},
    {"fidelity.medium.nx", KeyType::integer},
    {"fidelity.medium.dt", KeyType::real},
    {"fidelity.medium.nq", KeyType::integer},
    {"fidelity.medium.np", KeyType::integer},
    {"fidelity.medium.nx_decompose", KeyType::integer},
    {"fidelity.medium.keep_threshold", KeyType::real},
    {"fidelity.medium.q_min", KeyType::real},
    {"fidelity.medium.q_max", KeyType::real},
    {"fidelity.medium.p_min", KeyType::real},
    {"fidelity.medium.p_max", KeyType::real},
    {"fidelity.medium.cfl_safety", KeyType::real},
    {"fidelity.medium.kappa0", KeyType::integer},
    {"fidelity.medium.kernel", KeyType::string},
    {"fidelity.high.kind", KeyType::string},
    {"fidelity.high.nx", KeyType::integer},
    {"fidelity.high.dt", KeyType::real},
    {"uq.M", KeyType::integer},
    {"uq.N", KeyType::integer},
    {"uq.k_max", KeyType::integer},
    {"uq.tol", KeyType::real},
    {"uq.seed", KeyType::integer},
    {"outputs.dir", KeyType::string},
    {"outputs.bounds", KeyType::boolean},
    {"sc.enabled", KeyType::boolean},
    {"sc.n_c_list", KeyType::int_list},
    {"sc.n_ref", KeyType::integer},
    {"diagnose.eps_list", KeyType::real_list},
    {"diagnose.dz", KeyType::real},
    {"diagnose.direction", KeyType::integer},
    {"solve.fidelity", KeyType::string},
    {"solve.z", KeyType::string},
    {"online.z", KeyType::string},
    {"online.archive", KeyType::string},
}};

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : kSchema)
    if (key == spec.key) return &spec;
  return nullptr;
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggestion_for(const std::string& key) {
  const std::string lower = to_lower(key);
  std::string best;
  int best_dist = 4;  // suggest only close matches
  for (const auto& spec : kSchema) {
    if (to_lower(spec.key) == lower) return spec.key;
    const int d = edit_distance(lower, to_lower(spec.key));
    if (d < best_dist) {
      best_dist = d;
      best = spec.key;
    }
  }
  return best;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, long long& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

void check_value(const std::string& key, const std::string& value,
                 const std::string& where) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) {
    std::ostringstream os;
    os << where << ": unknown key '" << key << "'";
    const std::string hint = suggestion_for(key);
    if (!hint.empty()) os << " (did you mean '" << hint << "'?)";
    throw ConfigError(os.str());
  }
  auto fail = [&](const char* expected) {
    std::ostringstream os;
    os << where << ": key '" << key << "' expects " << expected << ", got '"
       << value << "'";
    throw ConfigError(os.str());
  };
  switch (spec->type) {
    case KeyType::string:
      if (value.empty()) fail("a nonempty string");
      break;
    case KeyType::integer: {
      long long v;
      if (!parse_int(value, v)) fail("an integer");
      break;
    }
    case KeyType::real: {
      double v;
      if (!parse_real(value, v)) fail("a real number");
      break;
    }
    case KeyType::boolean:
      if (value != "true" && value != "false") fail("true or false");
      break;
    case KeyType::real_list:
    case KeyType::int_list: {
      std::stringstream ss(value);
      std::string item;
      bool any = false;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (spec->type == KeyType::real_list) {
          double v;
          if (!parse_real(item, v)) fail("a comma-separated list of reals");
        } else {
          long long v;
          if (!parse_int(item, v)) fail("a comma-separated list of integers");
        }
        any = true;
      }
      if (!any) fail("a nonempty list");
      break;
    }
  }
}

}  // namespace

bool ResolvedConfig::has(const std::string& key) const {
  return values.count(key) > 0;
}

const std::string& ResolvedConfig::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end())
    throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string ResolvedConfig::get_or(const std::string& key,
                                   const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

long long ResolvedConfig::get_int(const std::string& key) const {
  long long v;
  if (!parse_int(get(key), v))
    throw ConfigError("key '" + key + "' is not an integer");
  return v;
}

double ResolvedConfig::get_real(const std::string& key) const {
  double v;
  if (!parse_real(get(key), v))
    throw ConfigError("key '" + key + "' is not a real number");
  return v;
}

bool ResolvedConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "' is not a boolean");
}

std::vector<double> ResolvedConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_real(trim(item), v))
      throw ConfigError("key '" + key + "' contains a non-real entry");
    out.push_back(v);
  }
  return out;
}

std::vector<long long> ResolvedConfig::get_int_list(const std::string& key) const {
  std::vector<long long> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v;
    if (!parse_int(trim(item), v))
      throw ConfigError("key '" + key + "' contains a non-integer entry");
    out.push_back(v);
  }
  return out;
}

void ResolvedConfig::set(const std::string& key, const std::string& value) {
  values[key] = value;
}

std::string ResolvedConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : values) os << k << " = " << v << "\n";
  return os.str();
}

ResolvedConfig parse_config(const std::string& text) {
  ResolvedConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::ostringstream where;
    where << "line " << lineno;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where.str() + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(where.str() + ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where.str() + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where.str() + ": empty key");
    if (!section.empty() && key.find('.') == std::string::npos)
      key = section + "." + key;
    check_value(key, value, where.str());
    if (cfg.values.count(key))
      throw ConfigError(where.str() + ": duplicate key '" + key + "'");
    cfg.values[key] = value;
  }
  return cfg;
}

ResolvedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

void apply_override(ResolvedConfig& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' must be key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  check_value(key, value, "override");
  cfg.values[key] = value;
}

std::string config_hash(const ResolvedConfig& cfg) {
  const std::string text = cfg.serialize();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace mfs
