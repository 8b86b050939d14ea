// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "otfsnoma/channel.hpp"
#include "otfsnoma/detector.hpp"
#include "otfsnoma/harness.hpp"
#include "otfsnoma/waveform.hpp"

using namespace otfsnoma;
using Catch::Approx;

namespace {

Eigen::VectorXcd random_symbols(const QamConstellation& c, int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, c.order() - 1);
  Eigen::VectorXcd x(n);
  for (auto& v : x) v = c.points()[pick(rng)];
  return x;
}

}  // namespace

TEST_CASE("noiseless identity channel: User 1 at the first pass, User 2 right after") {
  Rng rng(51);
  const QamConstellation c(4);
  const Eigen::VectorXcd x1 = random_symbols(c, 16, rng), x2 = random_symbols(c, 16, rng);
  const auto [rho1, rho2] = ftpa_allocate(10.0, 25.0);
  const Eigen::VectorXcd y = superimpose(x1, x2, rho1, rho2);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(16, 16);
  DetectorConfig cfg;
  cfg.user = 2;
  const auto res = detect(dense_operator(I), I.col(0), 4, 4, y, rho1, rho2, 0.0, cfg, c, c);
  REQUIRE(res.diagnostics.size() == 2);
  CHECK(res.diagnostics[0].new_reliable1 == 16);
  CHECK(res.diagnostics[0].new_reliable2 == 0);  // User 2 waits for its partner
  CHECK(res.diagnostics[1].new_reliable2 == 16);
  CHECK(res.x_hat1 == x1);
  CHECK(res.x_hat2 == x2);
  CHECK(res.undetected_at_exit == 0);

  cfg.user = 1;
  const auto r1 = detect(dense_operator(I), I.col(0), 4, 4, y, rho1, rho2, 0.0, cfg, c, c);
  CHECK(r1.iterations_used == 1);
  CHECK(r1.x_hat_user == x1);
}

TEST_CASE("User 1 is error free at 40 dB on a mobile channel") {
  const QamConstellation c(4);
  const FrameConfig frame{4, 4, 0, 15e3, 5.9e9};
  const auto [rho1, rho2] = ftpa_allocate(40.0, 55.0);
  const double sigma2 = snr_to_sigma2(40.0);
  int errors = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = trial_rng(52, trial);
    const Eigen::VectorXcd x1 = random_symbols(c, 16, rng), x2 = random_symbols(c, 16, rng);
    const auto ch = sample_tdlc(300e-9, 1093.0, frame, rng);
    auto dt = std::make_shared<const DelayTimeChannel>(ch, frame);
    const auto G = effective_channel_operator(dt);
    const Eigen::VectorXcd y = add_awgn(G.apply(superimpose(x1, x2, rho1, rho2)), sigma2, rng);
    const auto res = detect(G, first_column(G), 4, 4, y, rho1, rho2, sigma2, DetectorConfig{}, c, c);
    for (int n = 0; n < 16; ++n) errors += res.x_hat_user[n] != x1[n];
  }
  CHECK(errors == 0);
}

TEST_CASE("a single naive pass makes one solver call") {
  Rng rng(53);
  const QamConstellation c(16);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(16, 16);
  const auto [rho1, rho2] = ftpa_allocate(10.0, 25.0);
  const Eigen::VectorXcd y =
      add_awgn(superimpose(random_symbols(c, 16, rng), random_symbols(c, 16, rng), rho1, rho2), 0.05, rng);
  DetectorConfig cfg;
  cfg.K = 1;
  cfg.policy = ThresholdPolicy::Naive;
  const auto res = detect(dense_operator(I), I.col(0), 4, 4, y, rho1, rho2, 0.05, cfg, c, c);
  CHECK(res.solver_calls == 1);
  CHECK(res.diagnostics.size() == 1);
  CHECK(res.diagnostics[0].T1 == 0.0);
  for (int n = 0; n < 16; ++n) CHECK(quantize(res.x_hat_user[n], c) == res.x_hat_user[n]);
}

TEST_CASE("RZ partition") {
  const QamConstellation c(16);
  const double d = c.half_distance();
  Eigen::VectorXcd x(6);
  x << cplx(0.60, 0.05), cplx(0.95, 0.33), cplx(-0.1, -0.62), cplx(0.3, 0.9), cplx(-1.2, 1.3),
      cplx(0.0, 0.0);
  const std::vector<int> idx{0, 1, 2, 3, 4, 5};
  CHECK(rz_partition(x, idx, 0.0, c).reliable.size() == 6);
  // full-width strips cover |u| < 3d; elements with both parts outside stay reliable
  CHECK(rz_partition(x, idx, 2 * d + 1e-12, c, ZoneRule::And).reliable == std::vector<int>{1, 4});
  // per element: in a strip when within T/2 of a boundary in {-2d, 0, 2d}
  const double T = 0.3;
  auto strip = [&](double u) {
    for (double b : {-2 * d, 0.0, 2 * d})
      if (std::abs(u - b) < T / 2) return true;
    return false;
  };
  for (auto rule : {ZoneRule::And, ZoneRule::Or}) {
    std::vector<int> expect;
    for (int n : idx) {
      const bool re = strip(x[n].real()), im = strip(x[n].imag());
      const bool out = rule == ZoneRule::And ? (re && im) : (re || im);
      if (!out) expect.push_back(n);
    }
    const auto part = rz_partition(x, idx, T, c, rule);
    CHECK(part.reliable == expect);
    for (std::size_t j = 0; j < part.reliable.size(); ++j)
      CHECK(part.quantized[j] == quantize(x[part.reliable[j]], c));
  }
  CHECK(rz_partition(x, {1, 3}, 0.0, c).reliable == std::vector<int>{1, 3});
}

TEST_CASE("interference cancellation") {
  Rng rng(54);
  const QamConstellation c(4);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd Gm(16, 16);
  for (auto& v : Gm.reshaped()) v = cplx(g(rng), g(rng)) / 4.0;
  Gm += Eigen::MatrixXcd::Identity(16, 16);
  const auto G = dense_operator(Gm);
  const Eigen::VectorXcd x1 = random_symbols(c, 16, rng), x2 = random_symbols(c, 16, rng);
  const auto [rho1, rho2] = ftpa_allocate(5.0, 20.0);
  const Eigen::VectorXcd y = Gm * superimpose(x1, x2, rho1, rho2);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(16);
  CHECK(cancel_interference(y, G, zero, zero, rho1, rho2) == y);
  CHECK(cancel_interference(y, G, x1, x2, rho1, rho2).norm() < 1e-12);
  Eigen::VectorXcd part = x1;
  part.tail(8).setZero();
  CHECK(cancel_interference(y, G, part, zero, rho1, rho2).norm() < y.norm());
}

TEST_CASE("naive policy exit: N1 empties at k = K, leftovers are force-quantized") {
  Rng rng(54);
  const QamConstellation c(4);
  const auto [rho1, rho2] = ftpa_allocate(5.0, 20.0);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(16, 16);
  const Eigen::VectorXcd y =
      add_awgn(superimpose(random_symbols(c, 16, rng), random_symbols(c, 16, rng), rho1, rho2), 0.3, rng);
  DetectorConfig cfg;
  cfg.user = 2;
  cfg.policy = ThresholdPolicy::Naive;
  cfg.record_trace = true;
  const auto res = detect(dense_operator(I), I.col(0), 4, 4, y, rho1, rho2, 0.3, cfg, c, c);
  if (res.iterations_used == cfg.K) {
    const auto& last = res.trace.back();
    int n1 = 0;
    for (auto v : last.undetected1) n1 += v;
    CHECK(static_cast<int>(last.reliable1.size()) == n1);
  }
  for (int n = 0; n < 16; ++n) {
    CHECK(quantize(res.x_hat1[n], c) == res.x_hat1[n]);
    CHECK(quantize(res.x_hat_user[n], c) == res.x_hat_user[n]);
  }
}

TEST_CASE("naive threshold schedule") {
  const double d = std::sqrt(0.5);
  CHECK(naive_threshold(10, 10, d) == 0.0);
  CHECK(naive_threshold(1, 10, d) == Approx(1.27279).epsilon(1e-5));
  for (int k = 1; k < 10; ++k) CHECK(naive_threshold(k + 1, 10, d) < naive_threshold(k, 10, d));
  CHECK_THROWS_AS(naive_threshold(0, 10, d), std::domain_error);
}

TEST_CASE("detector argument checks") {
  const QamConstellation c(4);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(16, 16);
  const Eigen::VectorXcd y = Eigen::VectorXcd::Zero(16);
  DetectorConfig cfg;
  cfg.K = 0;
  CHECK_THROWS_AS(detect(dense_operator(I), I.col(0), 4, 4, y, 0.9, 0.1, 0.1, cfg, c, c), ConfigError);
  CHECK_THROWS_AS(detect(dense_operator(I), I.col(0), 4, 2, y, 0.9, 0.1, 0.1, DetectorConfig{}, c, c),
                  DimensionError);
  CHECK_THROWS_AS(detect(dense_operator(I), I.col(0), 4, 4, y, 0.1, 0.9, 0.1, DetectorConfig{}, c, c),
                  std::invalid_argument);
}
