// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "otfsnoma/grid.hpp"
#include "otfsnoma/linear_operator.hpp"
#include "otfsnoma/types.hpp"

namespace otfsnoma {

struct ChannelPath {
  cplx gain;
  int delay_tap = 0;        // samples
  double doppler_hz = 0.0;
};

struct ChannelRealization {
  std::vector<ChannelPath> paths;
  std::vector<double> pdp;  // per path, sums to 1
  double v_max_hz = 0.0;
};

// continuous: phase advances every sample. block_fading: CIR frozen over each OFDM symbol.
enum class ChannelMode { Continuous, BlockFading };

struct TdlTap {
  double normalized_delay;
  double power_db;
};

// 3GPP TR 38.901 Table 7.7.2-3 (TDL-C), delays normalized to the RMS delay spread.
const std::vector<TdlTap>& tdl_c_profile();

// Largest sample tap produced by scaling the TDL-C delays by delay_spread_s.
int tdlc_max_tap(double delay_spread_s, const FrameConfig& cfg);

ChannelRealization sample_tdlc(double delay_spread_s, double v_max_hz, const FrameConfig& cfg,
                               Rng& rng);

// r[n] = sum_p h_p exp(j 2pi nu_p (n - l_p) t_s) s[n - l_p], zero initial state.
Eigen::VectorXcd apply_ltv_channel(const Eigen::VectorXcd& s, const ChannelRealization& ch,
                                   const FrameConfig& cfg,
                                   ChannelMode mode = ChannelMode::Continuous);

Eigen::MatrixXcd build_time_domain_matrix(const ChannelRealization& ch, const FrameConfig& cfg,
                                          ChannelMode mode = ChannelMode::Continuous);

Eigen::VectorXcd add_awgn(const Eigen::VectorXcd& r, double sigma2, Rng& rng);

double snr_to_sigma2(double snr_db);

// The channel seen between CP insertion and CP removal. For every OFDM symbol b it is an
// M x M matrix H_b with H_b(i, (i - l) mod M) = c_l[b L + n_cp + i], so that
// G = (F_N kron I_M) blockdiag(H_b) (F_N^H kron I_M).
class DelayTimeChannel {
 public:
  DelayTimeChannel(const ChannelRealization& ch, const FrameConfig& cfg,
                   ChannelMode mode = ChannelMode::Continuous);

  const FrameConfig& frame() const { return cfg_; }
  int taps() const { return static_cast<int>(coef_.rows()); }

  // tap l coefficient for output sample i of OFDM symbol b
  cplx coefficient(int l, int b, int i) const { return coef_(l, b * cfg_.M + i); }

  Eigen::MatrixXcd block(int b) const;

  // blockdiag(H_b) and its adjoint on a grid-layout vector (block b = column b).
  Eigen::VectorXcd apply_blocks(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_blocks_adjoint(const Eigen::VectorXcd& y) const;

 private:
  FrameConfig cfg_;
  Eigen::MatrixXcd coef_;
};

// Matrix-free effective delay-Doppler channel G and G^H.
LinearOperator<double> effective_channel_operator(std::shared_ptr<const DelayTimeChannel> ch);

}  // namespace otfsnoma
