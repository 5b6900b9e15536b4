#include "proxdiff/bench/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace proxdiff {

namespace {

std::string expected_header() {
  std::string h = "iter";
  for (const char* name : ErrorCurves::kNames) {
    h += ',';
    h += name;
  }
  return h;
}

}  // namespace

void emit_csv(const ErrorCurves& curves, const std::string& path) {
  for (const auto& c : curves.curves)
    if (c.empty()) throw std::invalid_argument("emit_csv: empty curve");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");

  out << expected_header() << '\n';
  char buf[32];
  for (int k = 0; k <= curves.iters; ++k) {
    out << k;
    for (const auto& c : curves.curves) {
      std::snprintf(buf, sizeof(buf), "%.16e", c[static_cast<std::size_t>(k)]);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

ErrorCurves read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header())
    throw std::runtime_error("read_csv: unexpected header in '" + path + "'");

  ErrorCurves curves;
  for (auto& c : curves.curves) c.clear();
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_csv: malformed row");
    for (auto& c : curves.curves) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error("read_csv: row with missing columns in '" + path + "'");
      c.push_back(std::strtod(cell.c_str(), nullptr));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("read_csv: no data rows in '" + path + "'");
  curves.iters = rows - 1;
  return curves;
}

}  // namespace proxdiff
