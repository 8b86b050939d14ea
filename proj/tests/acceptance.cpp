// SPDX-License-Identifier: Apache-2.0
// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any failed.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "suite.hpp"

int main(int argc, char** argv) {
  using namespace otfsnoma::validation;
  CLI::App app{"acceptance criteria"};
  std::string group = "all";
  SuiteOptions opts;
  app.add_option("--group", group, "property, figures or all")
      ->check(CLI::IsMember({"property", "figures", "all"}));
  app.add_option("--seed", opts.seed, "seed");
  app.add_option("--threads", opts.threads, "worker threads");
  app.add_option("--trials", opts.figure_trials, "frames per SNR point for figure criteria");
  app.add_option("--csv-dir", opts.csv_dir, "directory for figure sweep CSVs");
  app.add_flag("--verbose", opts.verbose, "print sweep tables to stderr");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> ids;
  if (group != "figures") ids.insert(ids.end(), property_criteria.begin(), property_criteria.end());
  if (group != "property") ids.insert(ids.end(), figure_criteria.begin(), figure_criteria.end());
  int failed = 0;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::cout << format_result(r) << std::endl;
    failed += !r.passed;
  }
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
