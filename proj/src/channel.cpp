// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "otfsnoma/detail/fft.hpp"

namespace otfsnoma {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Reference sample for the Doppler phase of output sample n through tap l.
double phase_sample(int n, int l, const FrameConfig& cfg, ChannelMode mode) {
  if (mode == ChannelMode::BlockFading) {
    const int L = cfg.M + cfg.n_cp;
    return static_cast<double>((n / L) * L);
  }
  return static_cast<double>(n - l);
}

}  // namespace

const std::vector<TdlTap>& tdl_c_profile() {
  static const std::vector<TdlTap> table = {
      {0.0, -4.4},     {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},  {0.2176, -2.5},
      {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},  {0.6584, -7.4},  {0.7935, -7.1},
      {0.8213, -10.7}, {0.9336, -11.1}, {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},
      {2.7105, -13.2}, {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
      {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8}};
  return table;
}

int tdlc_max_tap(double delay_spread_s, const FrameConfig& cfg) {
  int lmax = 0;
  for (const auto& tap : tdl_c_profile())
    lmax = std::max(lmax, static_cast<int>(std::lround(tap.normalized_delay * delay_spread_s /
                                                       cfg.t_s())));
  return lmax;
}

ChannelRealization sample_tdlc(double delay_spread_s, double v_max_hz, const FrameConfig& cfg,
                               Rng& rng) {
  if (!(delay_spread_s > 0.0)) throw ConfigError("sample_tdlc: delay spread must be positive");
  if (!(v_max_hz >= 0.0)) throw ConfigError("sample_tdlc: v_max_hz must be >= 0");
  const int lmax = tdlc_max_tap(delay_spread_s, cfg);
  if (lmax > cfg.n_cp)
    throw ConfigError("sample_tdlc: CP too short, channel reaches tap " + std::to_string(lmax) +
                      " but n_cp = " + std::to_string(cfg.n_cp));

  const auto& table = tdl_c_profile();
  ChannelRealization ch;
  ch.v_max_hz = v_max_hz;
  double total = 0.0;
  for (const auto& tap : table) total += std::pow(10.0, tap.power_db / 10.0);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, two_pi);
  for (const auto& tap : table) {
    const double lambda = std::pow(10.0, tap.power_db / 10.0) / total;
    const double sd = std::sqrt(lambda / 2.0);
    ChannelPath p;
    p.gain = cplx(sd * gauss(rng), sd * gauss(rng));
    p.delay_tap = static_cast<int>(std::lround(tap.normalized_delay * delay_spread_s / cfg.t_s()));
    p.doppler_hz = v_max_hz * std::cos(angle(rng));
    ch.paths.push_back(p);
    ch.pdp.push_back(lambda);
  }
  return ch;
}

Eigen::VectorXcd apply_ltv_channel(const Eigen::VectorXcd& s, const ChannelRealization& ch,
                                   const FrameConfig& cfg, ChannelMode mode) {
  const int len = static_cast<int>(s.size());
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(len);
  const double ts = cfg.t_s();
  for (const auto& p : ch.paths) {
    for (int n = p.delay_tap; n < len; ++n) {
      const double t = phase_sample(n, p.delay_tap, cfg, mode) * ts;
      r[n] += p.gain * std::polar(1.0, two_pi * p.doppler_hz * t) * s[n - p.delay_tap];
    }
  }
  return r;
}

Eigen::MatrixXcd build_time_domain_matrix(const ChannelRealization& ch, const FrameConfig& cfg,
                                          ChannelMode mode) {
  const int len = cfg.frame_len();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(len, len);
  const double ts = cfg.t_s();
  for (const auto& p : ch.paths)
    for (int n = p.delay_tap; n < len; ++n) {
      const double t = phase_sample(n, p.delay_tap, cfg, mode) * ts;
      H(n, n - p.delay_tap) += p.gain * std::polar(1.0, two_pi * p.doppler_hz * t);
    }
  return H;
}

Eigen::VectorXcd add_awgn(const Eigen::VectorXcd& r, double sigma2, Rng& rng) {
  if (sigma2 < 0.0) throw std::invalid_argument("add_awgn: negative noise variance");
  if (sigma2 == 0.0) return r;
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
  Eigen::VectorXcd out = r;
  for (Eigen::Index n = 0; n < out.size(); ++n) out[n] += cplx(gauss(rng), gauss(rng));
  return out;
}

double snr_to_sigma2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

DelayTimeChannel::DelayTimeChannel(const ChannelRealization& ch, const FrameConfig& cfg,
                                   ChannelMode mode)
    : cfg_(cfg) {
  int lmax = 0;
  for (const auto& p : ch.paths) {
    if (p.delay_tap < 0 || p.delay_tap > cfg.n_cp)
      throw ConfigError("DelayTimeChannel: tap " + std::to_string(p.delay_tap) +
                        " outside the cyclic prefix (n_cp = " + std::to_string(cfg.n_cp) + ")");
    lmax = std::max(lmax, p.delay_tap);
  }
  const int M = cfg.M, L = cfg.M + cfg.n_cp;
  const double ts = cfg.t_s();
  coef_ = Eigen::MatrixXcd::Zero(lmax + 1, static_cast<Eigen::Index>(M) * cfg.N);
  for (const auto& p : ch.paths) {
    const int l = p.delay_tap;
    const cplx step = mode == ChannelMode::Continuous
                          ? std::polar(1.0, two_pi * p.doppler_hz * ts)
                          : cplx(1.0, 0.0);
    for (int b = 0; b < cfg.N; ++b) {
      const int n0 = b * L + cfg.n_cp;
      cplx ph = p.gain * std::polar(1.0, two_pi * p.doppler_hz * phase_sample(n0, l, cfg, mode) * ts);
      for (int i = 0; i < M; ++i) {
        coef_(l, b * M + i) += ph;
        ph *= step;
      }
    }
  }
}

Eigen::MatrixXcd DelayTimeChannel::block(int b) const {
  const int M = cfg_.M;
  Eigen::MatrixXcd Hb = Eigen::MatrixXcd::Zero(M, M);
  for (int l = 0; l < taps(); ++l)
    for (int i = 0; i < M; ++i) Hb(i, ((i - l) % M + M) % M) += coef_(l, b * M + i);
  return Hb;
}

Eigen::VectorXcd DelayTimeChannel::apply_blocks(const Eigen::VectorXcd& x) const {
  const int M = cfg_.M;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(x.size());
  for (int b = 0; b < cfg_.N; ++b) {
    const int base = b * M;
    for (int l = 0; l < taps(); ++l)
      for (int i = 0; i < M; ++i) {
        const int src = i >= l ? i - l : i - l + M;
        out[base + i] += coef_(l, base + i) * x[base + src];
      }
  }
  return out;
}

Eigen::VectorXcd DelayTimeChannel::apply_blocks_adjoint(const Eigen::VectorXcd& y) const {
  const int M = cfg_.M;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(y.size());
  for (int b = 0; b < cfg_.N; ++b) {
    const int base = b * M;
    for (int l = 0; l < taps(); ++l)
      for (int i = 0; i < M; ++i) {
        const int dst = i >= l ? i - l : i - l + M;
        out[base + dst] += std::conj(coef_(l, base + i)) * y[base + i];
      }
  }
  return out;
}

LinearOperator<double> effective_channel_operator(std::shared_ptr<const DelayTimeChannel> ch) {
  const FrameConfig cfg = ch->frame();
  LinearOperator<double> op;
  op.rows = op.cols = cfg.grid_size();
  op.apply = [ch, cfg](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    Eigen::VectorXcd t = x;
    detail::doppler_dft_inplace<double>(t, cfg.M, cfg.N, true);
    Eigen::VectorXcd u = ch->apply_blocks(t);
    detail::doppler_dft_inplace<double>(u, cfg.M, cfg.N, false);
    return u;
  };
  op.apply_adjoint = [ch, cfg](const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    Eigen::VectorXcd t = y;
    detail::doppler_dft_inplace<double>(t, cfg.M, cfg.N, true);
    Eigen::VectorXcd u = ch->apply_blocks_adjoint(t);
    detail::doppler_dft_inplace<double>(u, cfg.M, cfg.N, false);
    return u;
  };
  return op;
}

}  // namespace otfsnoma
