#include "mfschrod/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mfschrod/errors.hpp"

namespace mfs {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc())
    throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void emit_csv(const Table& table, const std::string& path) {
  if (table.names.size() != table.cols.size())
    throw NumericError("emit_csv: name/column count mismatch");
  size_t rows = table.cols.empty() ? 0 : table.cols[0].size();
  for (const auto& c : table.cols)
    if (c.size() != rows) throw NumericError("emit_csv: ragged columns");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("emit_csv: cannot open " + path);
  for (size_t i = 0; i < table.names.size(); ++i) {
    if (i) out << ',';
    out << table.names[i];
  }
  out << '\n';
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < table.cols.size(); ++c) {
      if (c) out << ',';
      out << format_double(table.cols[c][r]);
    }
    out << '\n';
  }
  if (!out) throw NumericError("emit_csv: write failed for " + path);
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("read_csv: cannot open " + path);
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw NumericError("read_csv: empty file");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) {
    table.names.push_back(cell);
    table.cols.emplace_back();
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    size_t c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= table.cols.size()) throw NumericError("read_csv: ragged row");
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw NumericError("read_csv: bad number " + cell);
      table.cols[c++].push_back(v);
    }
  }
  return table;
}

}  // namespace mfs
