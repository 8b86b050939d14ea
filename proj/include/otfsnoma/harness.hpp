// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "otfsnoma/config.hpp"
#include "otfsnoma/csv.hpp"
#include "otfsnoma/detector.hpp"

namespace otfsnoma {

// Inverse FTPA: the weaker user (User 1) gets the larger share.
std::pair<double, double> ftpa_allocate(double snr1_db, double snr2_db);

// One (SNR, Doppler) point of a sweep.
struct PointSpec {
  double snr_db_user1 = 0.0;
  double v_max_hz = 0.0;
  bool noiseless = false;         // sigma^2 = 0 for both users
  bool identity_channel = false;  // single unit path without Doppler
};

struct TrialCounts {
  // errors[scheme index in cfg.schemes][user - 1]
  std::vector<std::array<std::uint64_t, 2>> errors;
  std::vector<double> seconds;  // per scheme, both users
  std::uint64_t symbols_per_user = 0;
};

// Detector settings for a scheme at receiver `user`.
DetectorConfig detector_config(const SimConfig& cfg, Scheme scheme, int user);

TrialCounts run_trial(const SimConfig& cfg, const PointSpec& point, Rng& rng);

// Trial t of every sweep point runs on Rng(seed_seq{seed_lo, seed_hi, t}), so all points
// share symbols, channel draws and normalized noise (common random numbers).
Rng trial_rng(std::uint64_t master_seed, int trial);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Records ordered by Doppler, SNR, scheme, user.
std::vector<ResultRecord> run_sweep(const SimConfig& cfg, const ProgressFn& progress = {});

struct ApproxErrorConfig {
  int M = 4;
  int N = 4;
  double snr_db = 15.0;
  std::vector<double> velocity_kmh{90, 200, 300, 450};
  bool include_static = true;  // v = 0 control point first
  int realizations = 1000;
  std::uint64_t seed = 1;
  int qam_order = 4;
  double snr_gap_db = 15.0;
  double delay_spread_s = 300e-9;
  double f_c = 5.9e9;
  double delta_f = 15e3;
  int U = 15;
  double epsilon = 1e-2;
  Eigen::Index exact_cap = 256;
  int threads = 1;
};

struct ApproxErrorPoint {
  double velocity_kmh = 0.0;
  double v_max_hz = 0.0;
  double e_gamma = 0.0;
};

// e_gamma = (1/MN) E{ sum_n |gamma[n] - gamma~|^2 } over channel realizations.
std::vector<ApproxErrorPoint> approx_error_experiment(const ApproxErrorConfig& cfg);

}  // namespace otfsnoma
