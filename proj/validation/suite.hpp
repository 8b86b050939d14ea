// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace otfsnoma::validation {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured quantities behind the verdict
  double seconds = 0.0;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  int threads = 1;
  int figure_trials = 1000;  // frames per SNR point for the figure criteria
  bool verbose = false;      // print sweep tables to stderr
  std::string csv_dir;       // when set, figure sweeps are also written there as CSV
};

inline const std::vector<int> property_criteria{1, 2, 3, 4, 5, 6, 7};
inline const std::vector<int> figure_criteria{8, 9, 10, 11, 12};

// Throws std::out_of_range for ids outside 1..12.
CriterionResult run_criterion(int id, const SuiteOptions& opts);

// "PASS [n] name (detail)" or "FAIL [n] ..."
std::string format_result(const CriterionResult& r);

}  // namespace otfsnoma::validation
