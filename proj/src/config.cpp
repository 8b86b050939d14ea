// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace otfsnoma {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::ProposedOptimized: return "proposed_optimized";
    case Scheme::ProposedNaive: return "proposed_naive";
    case Scheme::MmseSic: return "mmse_sic";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "proposed_optimized") return Scheme::ProposedOptimized;
  if (name == "proposed_naive") return Scheme::ProposedNaive;
  if (name == "mmse_sic") return Scheme::MmseSic;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected proposed_optimized, proposed_naive or mmse_sic)");
}

double velocity_to_doppler(double velocity_kmh, double f_c) {
  return velocity_kmh / 3.6 * f_c / speed_of_light;
}

std::vector<double> SimConfig::doppler_sweep() const {
  if (!max_doppler_hz.empty()) return max_doppler_hz;
  std::vector<double> out;
  for (double v : velocity_kmh) out.push_back(velocity_to_doppler(v, frame.f_c));
  return out;
}

FrameConfig SimConfig::resolved_frame() const {
  FrameConfig f = frame;
  if (f.n_cp < 0) {
    f.n_cp = 0;
    f.n_cp = tdlc_max_tap(delay_spread_s, f);
  }
  return f;
}

void SimConfig::validate() const {
  resolved_frame().validate();
  QamConstellation probe1, probe2;
  try {
    probe1 = QamConstellation(qam_order_1);
    probe2 = QamConstellation(qam_order_2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (snr_db_user1.empty()) throw ConfigError("snr_db_user1 must not be empty");
  if (velocity_kmh.empty() && max_doppler_hz.empty())
    throw ConfigError("one of user_velocity_kmh / max_doppler_hz must be non-empty");
  for (double v : doppler_sweep())
    if (!(v >= 0.0)) throw ConfigError("Doppler values must be >= 0");
  if (!(delay_spread_s > 0.0)) throw ConfigError("delay_spread_s must be > 0");
  const FrameConfig f = resolved_frame();
  if (tdlc_max_tap(delay_spread_s, f) > f.n_cp)
    throw ConfigError("cp_length " + std::to_string(f.n_cp) + " shorter than the channel (" +
                      std::to_string(tdlc_max_tap(delay_spread_s, f)) + " taps)");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (K < 1 || U < 1) throw ConfigError("algorithm1_iterations and mlsqr_iterations must be >= 1");
  if (!(epsilon >= 0.0)) throw ConfigError("mlsqr_tolerance must be >= 0");
  if (!(naive_start_factor > 0.0)) throw ConfigError("naive_start_factor must be > 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  if (x != std::floor(x)) throw ConfigError(key + ": not an integer: '" + v + "'");
  return static_cast<long long>(x);
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> to_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0], key));
    } else if (parts.size() == 3) {
      const double a = to_double(parts[0], key), step = to_double(parts[1], key),
                   b = to_double(parts[2], key);
      if (!(step > 0.0)) throw ConfigError(key + ": range step must be > 0");
      for (int i = 0; a + i * step <= b + 1e-9 * std::abs(step); ++i) out.push_back(a + i * step);
    } else {
      throw ConfigError(key + ": malformed list item '" + item + "'");
    }
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

}  // namespace

SimConfig parse_config(std::istream& in, SimConfig cfg) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"delay_bins", [&](auto& k, auto& v) { cfg.frame.M = static_cast<int>(to_int(v, k)); }},
      {"doppler_bins", [&](auto& k, auto& v) { cfg.frame.N = static_cast<int>(to_int(v, k)); }},
      {"carrier_frequency_hz", [&](auto& k, auto& v) { cfg.frame.f_c = to_double(v, k); }},
      {"subcarrier_spacing_hz", [&](auto& k, auto& v) { cfg.frame.delta_f = to_double(v, k); }},
      {"cp_length",
       [&](auto& k, auto& v) { cfg.frame.n_cp = v == "auto" ? -1 : static_cast<int>(to_int(v, k)); }},
      {"qam_order_1", [&](auto& k, auto& v) { cfg.qam_order_1 = static_cast<int>(to_int(v, k)); }},
      {"qam_order_2", [&](auto& k, auto& v) { cfg.qam_order_2 = static_cast<int>(to_int(v, k)); }},
      {"channel_model",
       [&](auto& k, auto& v) {
         if (v != "TDL-C") throw ConfigError(k + ": only TDL-C is supported, got '" + v + "'");
       }},
      {"delay_spread_s", [&](auto& k, auto& v) { cfg.delay_spread_s = to_double(v, k); }},
      {"user_velocity_kmh", [&](auto& k, auto& v) { cfg.velocity_kmh = to_list(v, k); }},
      {"max_doppler_hz", [&](auto& k, auto& v) { cfg.max_doppler_hz = to_list(v, k); }},
      {"algorithm1_iterations", [&](auto& k, auto& v) { cfg.K = static_cast<int>(to_int(v, k)); }},
      {"mlsqr_iterations", [&](auto& k, auto& v) { cfg.U = static_cast<int>(to_int(v, k)); }},
      {"mlsqr_tolerance", [&](auto& k, auto& v) { cfg.epsilon = to_double(v, k); }},
      {"snr_db_user1", [&](auto& k, auto& v) { cfg.snr_db_user1 = to_list(v, k); }},
      {"snr_gap_db", [&](auto& k, auto& v) { cfg.snr_gap_db = to_double(v, k); }},
      {"trials", [&](auto& k, auto& v) { cfg.trials = static_cast<int>(to_int(v, k)); }},
      {"seed", [&](auto& k, auto& v) { cfg.seed = static_cast<std::uint64_t>(to_int(v, k)); }},
      {"threads", [&](auto& k, auto& v) { cfg.threads = static_cast<int>(to_int(v, k)); }},
      {"naive_start_factor", [&](auto& k, auto& v) { cfg.naive_start_factor = to_double(v, k); }},
      {"schemes",
       [&](auto&, auto& v) {
         cfg.schemes.clear();
         for (const auto& s : split(v, ',')) cfg.schemes.push_back(parse_scheme(s));
       }},
      {"channel_mode",
       [&](auto& k, auto& v) {
         if (v == "continuous") cfg.channel_mode = ChannelMode::Continuous;
         else if (v == "block_fading") cfg.channel_mode = ChannelMode::BlockFading;
         else throw ConfigError(k + ": expected continuous or block_fading, got '" + v + "'");
       }},
      {"zone_rule",
       [&](auto& k, auto& v) {
         if (v == "and") cfg.zone_rule = ZoneRule::And;
         else if (v == "or") cfg.zone_rule = ZoneRule::Or;
         else throw ConfigError(k + ": expected and or or, got '" + v + "'");
       }},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  return cfg;
}

SimConfig load_config(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_config(const SimConfig& c) {
  std::ostringstream os;
  os.precision(10);
  os << "delay_bins = " << c.frame.M << "\n"
     << "doppler_bins = " << c.frame.N << "\n"
     << "carrier_frequency_hz = " << c.frame.f_c << "\n"
     << "subcarrier_spacing_hz = " << c.frame.delta_f << "\n"
     << "cp_length = " << (c.frame.n_cp < 0 ? std::string("auto") : std::to_string(c.frame.n_cp))
     << "\n"
     << "qam_order_1 = " << c.qam_order_1 << "\n"
     << "qam_order_2 = " << c.qam_order_2 << "\n"
     << "channel_model = TDL-C\n"
     << "delay_spread_s = " << c.delay_spread_s << "\n"
     << "user_velocity_kmh = " << join(c.velocity_kmh) << "\n";
  if (!c.max_doppler_hz.empty()) os << "max_doppler_hz = " << join(c.max_doppler_hz) << "\n";
  os << "algorithm1_iterations = " << c.K << "\n"
     << "mlsqr_iterations = " << c.U << "\n"
     << "mlsqr_tolerance = " << c.epsilon << "\n"
     << "snr_db_user1 = " << join(c.snr_db_user1) << "\n"
     << "snr_gap_db = " << c.snr_gap_db << "\n"
     << "trials = " << c.trials << "\n"
     << "seed = " << c.seed << "\n"
     << "threads = " << c.threads << "\n"
     << "naive_start_factor = " << c.naive_start_factor << "\n"
     << "schemes = ";
  for (std::size_t i = 0; i < c.schemes.size(); ++i)
    os << (i ? "," : "") << to_string(c.schemes[i]);
  os << "\n"
     << "channel_mode = "
     << (c.channel_mode == ChannelMode::Continuous ? "continuous" : "block_fading") << "\n"
     << "zone_rule = " << (c.zone_rule == ZoneRule::Or ? "or" : "and") << "\n";
  return os.str();
}

}  // namespace otfsnoma
