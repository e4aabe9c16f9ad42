#pragma once

#include <map>
#include <string>
#include <vector>

namespace mfs {

// Flat dotted-key configuration. Input is INI-style text: [section] headers
// followed by key = value lines; '#' starts a comment. Dotted keys outside a
// section are accepted as-is, so serialize() output reparses to the same map.
struct ResolvedConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  std::string serialize() const;  // sorted "key = value" lines
  bool operator==(const ResolvedConfig&) const = default;
};

// Parses and schema-checks the text. Unknown keys are rejected with a
// line-anchored message (suggesting the nearest known key); values are
// type-checked. Mesh and constraint validation against the chosen problem
// happens in make_setup.
ResolvedConfig parse_config(const std::string& text);

ResolvedConfig parse_config_file(const std::string& path);

// Applies a "key=value" override (same schema checks as parse_config).
void apply_override(ResolvedConfig& cfg, const std::string& assignment);

// FNV-1a 64-bit hash of the canonical serialization, as hex.
std::string config_hash(const ResolvedConfig& cfg);

}  // namespace mfs
