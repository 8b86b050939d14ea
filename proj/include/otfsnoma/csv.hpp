// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace otfsnoma {

struct ResultRecord {
  double snr_db = 0.0;
  double v_max_hz = 0.0;
  std::string scheme;
  int user = 1;
  std::uint64_t symbol_errors = 0;
  std::uint64_t symbols = 0;
  double ser = 0.0;  // symbol_errors / symbols
  int trials = 0;
  double wall_time_s = 0.0;

  bool operator==(const ResultRecord&) const = default;
};

inline constexpr const char* csv_header =
    "snr_db,v_max_hz,scheme,user,symbol_errors,symbols,ser,trials,wall_time_s";

// Real fields use round-trip precision; ser is written with 6 significant digits and
// recomputed from the counts on read.
void write_csv(const std::vector<ResultRecord>& records, std::ostream& out);
void write_csv(const std::vector<ResultRecord>& records, const std::string& path);

// Throws std::runtime_error with line context on malformed input or an inconsistent ser.
std::vector<ResultRecord> read_csv(std::istream& in);
std::vector<ResultRecord> read_csv(const std::string& path);

}  // namespace otfsnoma
