// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace otfsnoma {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void write_csv(const std::vector<ResultRecord>& records, std::ostream& out) {
  out << csv_header << "\n";
  for (const auto& r : records) {
    out << fmt("%.17g", r.snr_db) << ',' << fmt("%.17g", r.v_max_hz) << ',' << r.scheme << ','
        << r.user << ',' << r.symbol_errors << ',' << r.symbols << ','
        << fmt("%.5e", ratio(r.symbol_errors, r.symbols)) << ',' << r.trials << ','
        << fmt("%.17g", r.wall_time_s) << "\n";
  }
}

void write_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header)
    throw std::runtime_error("csv: missing or unexpected header");
  std::vector<ResultRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = "csv line " + std::to_string(lineno) + ": ";
    if (f.size() != 9) throw std::runtime_error(where + "expected 9 fields");
    ResultRecord r;
    try {
      r.snr_db = std::stod(f[0]);
      r.v_max_hz = std::stod(f[1]);
      r.scheme = f[2];
      r.user = std::stoi(f[3]);
      r.symbol_errors = std::stoull(f[4]);
      r.symbols = std::stoull(f[5]);
      const double printed = std::stod(f[6]);
      r.trials = std::stoi(f[7]);
      r.wall_time_s = std::stod(f[8]);
      r.ser = ratio(r.symbol_errors, r.symbols);
      if (std::abs(printed - r.ser) > 1e-5 * r.ser)
        throw std::runtime_error("ser does not match symbol_errors/symbols");
    } catch (const std::logic_error& e) {
      throw std::runtime_error(where + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(where + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace otfsnoma
