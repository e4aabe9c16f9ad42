#pragma once

#include <string>
#include <vector>

namespace mfs {

// Named columns of reals, all the same length.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
};

// Header row then data rows, reals as shortest round-trip decimals,
// newline-terminated UTF-8.
void emit_csv(const Table& table, const std::string& path);

Table read_csv(const std::string& path);

// Shortest decimal that parses back to exactly x.
std::string format_double(double x);

}  // namespace mfs
