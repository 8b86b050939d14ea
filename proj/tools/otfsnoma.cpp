// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otfsnoma/config.hpp"
#include "otfsnoma/csv.hpp"
#include "otfsnoma/harness.hpp"
#include "suite.hpp"

namespace {

using namespace otfsnoma;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> schemes;
};

SimConfig resolve(const CommonFlags& f) {
  SimConfig cfg = f.config_path.empty() ? SimConfig{} : load_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : f.schemes) cfg.schemes.push_back(parse_scheme(s));
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "key = value configuration file");
  sub->add_option("--seed", f.seed, "master seed (overrides the config)");
  sub->add_option("--threads", f.threads, "worker threads (overrides the config)");
  sub->add_option("--scheme", f.schemes,
                  "proposed_optimized, proposed_naive or mmse_sic (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OTFS-NOMA link-level simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_out;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "SER sweep over SNR and Doppler, written as CSV");
  add_common(run, run_flags);
  run->add_option("--out", run_out, "CSV path (stdout when omitted)");
  run->add_flag("--quiet", quiet, "no progress on stderr");

  ApproxErrorConfig ae;
  std::string ae_out;
  std::optional<std::uint64_t> ae_seed;
  auto* approx = app.add_subcommand("approx-error", "MSE approximation error versus velocity");
  approx->add_option("--seed", ae_seed, "master seed");
  approx->add_option("--threads", ae.threads, "worker threads");
  approx->add_option("--realizations", ae.realizations, "channel realizations per velocity");
  approx->add_option("--snr", ae.snr_db, "SNR in dB");
  approx->add_option("--velocity", ae.velocity_kmh, "velocities in km/h")->delimiter(',');
  approx->add_option("--out", ae_out, "CSV path (stdout when omitted)");

  validation::SuiteOptions vopts;
  bool figures = false;
  std::vector<int> criteria;
  auto* validate = app.add_subcommand("validate", "run the oracle and property checks");
  validate->add_option("--seed", vopts.seed, "seed for the randomized checks");
  validate->add_option("--threads", vopts.threads, "worker threads");
  validate->add_flag("--figures", figures, "also run the figure-trend checks (slow)");
  validate->add_option("--criterion", criteria, "run only these criteria (repeatable)");
  validate->add_option("--trials", vopts.figure_trials, "frames per SNR point for figure checks");
  validate->add_flag("--verbose", vopts.verbose, "print sweep tables to stderr");
  validate->add_option("--csv-dir", vopts.csv_dir, "write figure sweeps as CSV into this directory");

  CommonFlags show_flags;
  auto* show = app.add_subcommand("show-config", "print the resolved configuration");
  add_common(show, show_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (*show) {
      std::cout << format_config(resolve(show_flags));
    } else if (*run) {
      const SimConfig cfg = resolve(run_flags);
      ProgressFn progress;
      if (!quiet)
        progress = [](std::size_t done, std::size_t total) {
          if (done == total || done % 50 == 0)
            std::fprintf(stderr, "\r%zu/%zu trials", done, total);
          if (done == total) std::fprintf(stderr, "\n");
        };
      const auto records = run_sweep(cfg, progress);
      if (run_out.empty()) write_csv(records, std::cout);
      else write_csv(records, run_out);
    } else if (*approx) {
      if (ae_seed) ae.seed = *ae_seed;
      const auto pts = approx_error_experiment(ae);
      std::FILE* f = ae_out.empty() ? stdout : std::fopen(ae_out.c_str(), "w");
      if (!f) throw std::runtime_error("cannot open '" + ae_out + "' for writing");
      std::fprintf(f, "velocity_kmh,v_max_hz,e_gamma\n");
      for (const auto& p : pts) std::fprintf(f, "%.10g,%.10g,%.6e\n", p.velocity_kmh, p.v_max_hz, p.e_gamma);
      if (f != stdout) std::fclose(f);
    } else if (*validate) {
      if (criteria.empty()) {
        criteria = validation::property_criteria;
        if (figures)
          criteria.insert(criteria.end(), validation::figure_criteria.begin(),
                          validation::figure_criteria.end());
      }
      bool all = true;
      for (int id : criteria) {
        const auto r = validation::run_criterion(id, vopts);
        std::cout << validation::format_result(r) << std::endl;
        all = all && r.passed;
      }
      return all ? exit_ok : exit_runtime;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_ok;
}
