// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "otfsnoma/channel.hpp"
#include "otfsnoma/grid.hpp"

namespace otfsnoma {

enum class Scheme { ProposedOptimized, ProposedNaive, MmseSic };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);  // throws ConfigError

struct SimConfig {
  FrameConfig frame{64, 16, -1, 15e3, 5.9e9};  // n_cp = -1: largest channel tap
  int qam_order_1 = 4;
  int qam_order_2 = 4;
  std::vector<double> snr_db_user1{0, 3, 6, 9, 12, 15, 18, 21, 24};
  double snr_gap_db = 15.0;
  std::vector<double> velocity_kmh{200};
  std::vector<double> max_doppler_hz;  // overrides velocity_kmh when non-empty
  double delay_spread_s = 300e-9;
  ChannelMode channel_mode = ChannelMode::Continuous;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes{Scheme::ProposedOptimized, Scheme::ProposedNaive, Scheme::MmseSic};
  int K = 10;
  int U = 15;
  double epsilon = 1e-2;
  ZoneRule zone_rule = ZoneRule::Or;
  double naive_start_factor = 2.0;
  int threads = 1;

  // Doppler sweep in Hz (nu_max = v f_c / c).
  std::vector<double> doppler_sweep() const;

  // Frame with n_cp resolved against the TDL-C table when it was left at -1.
  FrameConfig resolved_frame() const;

  void validate() const;  // throws ConfigError
};

constexpr double speed_of_light = 2.998e8;

double velocity_to_doppler(double velocity_kmh, double f_c);

// key = value lines, '#' comments, lists separated by commas, ranges as start:step:stop.
// Unknown keys and malformed values throw ConfigError naming the line.
SimConfig parse_config(std::istream& in, SimConfig base = {});
SimConfig load_config(const std::string& path, SimConfig base = {});

// Every key with its resolved value, in file syntax.
std::string format_config(const SimConfig& cfg);

}  // namespace otfsnoma
