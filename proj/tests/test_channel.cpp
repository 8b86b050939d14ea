// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "otfsnoma/channel.hpp"
#include "otfsnoma/waveform.hpp"

using namespace otfsnoma;
using Catch::Approx;

namespace {

Eigen::VectorXcd random_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v;
}

ChannelRealization random_paths(int n_paths, int max_tap, double max_nu, Rng& rng) {
  ChannelRealization ch;
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> tap(0, max_tap);
  std::uniform_real_distribution<double> nu(-max_nu, max_nu);
  for (int p = 0; p < n_paths; ++p) {
    ch.paths.push_back({cplx(g(rng), g(rng)), tap(rng), nu(rng)});
    ch.pdp.push_back(1.0 / n_paths);
  }
  return ch;
}

}  // namespace

TEST_CASE("TDL-C draws") {
  Rng rng(21);
  const FrameConfig cfg{64, 16, 2, 15e3, 5.9e9};
  const auto ch = sample_tdlc(300e-9, 1000.0, cfg, rng);
  REQUIRE(ch.paths.size() == tdl_c_profile().size());
  double total = 0.0;
  for (double l : ch.pdp) total += l;
  CHECK(total == Approx(1.0).margin(1e-9));
  for (const auto& p : ch.paths) CHECK(std::abs(p.doppler_hz) <= 1000.0);

  const auto still = sample_tdlc(300e-9, 0.0, cfg, rng);
  for (const auto& p : still.paths) CHECK(p.doppler_hz == 0.0);

  // average path power over many draws follows the profile
  std::vector<double> power(ch.paths.size(), 0.0);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto d = sample_tdlc(300e-9, 500.0, cfg, rng);
    for (std::size_t p = 0; p < power.size(); ++p) power[p] += std::norm(d.paths[p].gain) / draws;
  }
  for (std::size_t p = 0; p < power.size(); ++p) CHECK(std::abs(power[p] - ch.pdp[p]) < 0.1 * ch.pdp[p] + 1e-4);
}

TEST_CASE("TDL-C tap span at 300 ns and M = 64") {
  const FrameConfig cfg{64, 16, 0, 15e3, 5.9e9};
  // largest normalized delay of the table times 300 ns over t_s
  double max_norm = 0.0;
  for (const auto& t : tdl_c_profile()) max_norm = std::max(max_norm, t.normalized_delay);
  const int expect = static_cast<int>(std::lround(max_norm * 300e-9 * 64 * 15e3));
  CHECK(max_norm == Approx(8.6523));
  CHECK(expect == 2);
  CHECK(tdlc_max_tap(300e-9, cfg) == expect);
  Rng rng(22);
  CHECK_THROWS_AS(sample_tdlc(300e-9, 0.0, cfg, rng), ConfigError);
}

TEST_CASE("LTV channel trivial cases") {
  Rng rng(23);
  const FrameConfig cfg{8, 4, 2, 15e3, 5.9e9};
  const Eigen::VectorXcd s = random_vector(cfg.frame_len(), rng);
  ChannelRealization id;
  id.paths = {{cplx(1.0), 0, 0.0}};
  id.pdp = {1.0};
  CHECK((apply_ltv_channel(s, id, cfg) - s).norm() < 1e-15);
  CHECK((build_time_domain_matrix(id, cfg) - Eigen::MatrixXcd::Identity(s.size(), s.size())).norm() < 1e-15);

  ChannelRealization ramp;
  ramp.paths = {{cplx(1.0), 0, 700.0}};
  ramp.pdp = {1.0};
  const Eigen::VectorXcd r = apply_ltv_channel(s, ramp, cfg);
  for (Eigen::Index n = 0; n < s.size(); ++n)
    CHECK(std::abs(r[n] - std::polar(1.0, 2 * std::numbers::pi * 700.0 * n * cfg.t_s()) * s[n]) < 1e-12);
  const Eigen::MatrixXcd H = build_time_domain_matrix(ramp, cfg);
  Eigen::MatrixXcd off = H;
  off.diagonal().setZero();
  CHECK(off.norm() == 0.0);
  CHECK((H.diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("static channel is a plain convolution") {
  Rng rng(24);
  const FrameConfig cfg{8, 4, 2, 15e3, 5.9e9};
  const Eigen::VectorXcd s = random_vector(cfg.frame_len(), rng);
  ChannelRealization ch;
  ch.paths = {{cplx(0.9, 0.1), 0, 0.0}, {cplx(-0.3, 0.4), 2, 0.0}};
  ch.pdp = {0.5, 0.5};
  Eigen::VectorXcd conv = Eigen::VectorXcd::Zero(s.size());
  for (Eigen::Index n = 0; n < s.size(); ++n)
    for (const auto& p : ch.paths)
      if (n >= p.delay_tap) conv[n] += p.gain * s[n - p.delay_tap];
  CHECK((apply_ltv_channel(s, ch, cfg) - conv).norm() < 1e-12);
}

TEST_CASE("operator and matrix agree for random path sets") {
  Rng rng(25);
  const FrameConfig cfg{8, 4, 3, 15e3, 5.9e9};
  for (auto mode : {ChannelMode::Continuous, ChannelMode::BlockFading}) {
    const auto ch = random_paths(3, 3, 1500.0, rng);
    const Eigen::VectorXcd s = random_vector(cfg.frame_len(), rng);
    CHECK((build_time_domain_matrix(ch, cfg, mode) * s - apply_ltv_channel(s, ch, cfg, mode)).norm() <
          1e-12 * s.norm());
  }
}

TEST_CASE("matrix-free effective channel matches the dense construction") {
  Rng rng(26);
  const FrameConfig cfg{8, 4, 3, 15e3, 5.9e9};
  for (auto mode : {ChannelMode::Continuous, ChannelMode::BlockFading}) {
    const auto ch = random_paths(4, 3, 2000.0, rng);
    const Eigen::MatrixXcd G = build_effective_channel(build_time_domain_matrix(ch, cfg, mode), cfg);
    auto dt = std::make_shared<const DelayTimeChannel>(ch, cfg, mode);
    const LinearOperator<double> op = effective_channel_operator(dt);
    CHECK((to_dense(op) - G).norm() < 1e-12 * G.norm());
    const Eigen::VectorXcd u = random_vector(32, rng);
    CHECK((op.apply_adjoint(u) - G.adjoint() * u).norm() < 1e-12 * u.norm() * G.norm());
  }
}

TEST_CASE("block fading keeps every per-symbol block circulant") {
  Rng rng(27);
  const FrameConfig cfg{8, 4, 3, 15e3, 5.9e9};
  const auto ch = random_paths(3, 3, 2000.0, rng);
  auto dt = std::make_shared<const DelayTimeChannel>(ch, cfg, ChannelMode::BlockFading);
  // time variation between OFDM symbols still couples Doppler bins, but within a symbol
  // each H_b is circulant
  for (int b = 0; b < cfg.N; ++b) {
    const Eigen::MatrixXcd Hb = dt->block(b);
    for (int i = 0; i < cfg.M; ++i)
      for (int j = 0; j < cfg.M; ++j)
        CHECK(std::abs(Hb(i, j) - Hb((i + 1) % cfg.M, (j + 1) % cfg.M)) < 1e-14);
  }
}

TEST_CASE("AWGN statistics") {
  Rng rng(28);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(100000);
  CHECK(add_awgn(zero, 0.0, rng) == zero);
  const Eigen::VectorXcd w = add_awgn(zero, 0.3, rng);
  CHECK(w.squaredNorm() / w.size() == Approx(0.3).epsilon(0.03));
  const double cross = (w.real().array() * w.imag().array()).mean() / 0.15;
  CHECK(std::abs(cross) < 0.02);
  CHECK(snr_to_sigma2(0.0) == Approx(1.0));
  CHECK(snr_to_sigma2(10.0) == Approx(0.1));
  CHECK(snr_to_sigma2(15.0) == Approx(0.0316227766));
}
