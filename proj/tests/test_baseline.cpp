// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "otfsnoma/baseline.hpp"
#include "otfsnoma/harness.hpp"
#include "otfsnoma/thresholds.hpp"
#include "otfsnoma/waveform.hpp"

using namespace otfsnoma;

namespace {

Eigen::MatrixXcd random_matrix(int n, Rng& rng, double sd) {
  std::normal_distribution<double> g(0.0, sd / std::sqrt(2.0));
  Eigen::MatrixXcd A(n, n);
  for (auto& v : A.reshaped()) v = cplx(g(rng), g(rng));
  return A;
}

Eigen::VectorXcd random_symbols(const QamConstellation& c, int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, c.order() - 1);
  Eigen::VectorXcd x(n);
  for (auto& v : x) v = c.points()[pick(rng)];
  return x;
}

}  // namespace

TEST_CASE("MMSE matrix closed forms and defining property") {
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
  CHECK((mmse_matrix(I, 0.5).W - (2.0 / 3.0) * I).norm() < 1e-14);
  const cplx c(0.4, 1.2);
  CHECK((mmse_matrix(c * I, 0.3).W - std::conj(c) / (std::norm(c) + 0.3) * I).norm() < 1e-14);
  Rng rng(61);
  const Eigen::MatrixXcd G = random_matrix(8, rng, 1.0);
  Eigen::MatrixXcd A = G.adjoint() * G;
  A.diagonal().array() += 0.2;
  CHECK((A * mmse_matrix(G, 0.2).W - G.adjoint()).norm() <= 1e-8);
  CHECK_THROWS_AS(mmse_matrix(G, 0.0), std::domain_error);
}

TEST_CASE("block equalizer equals the dense MMSE solve") {
  Rng rng(62);
  const FrameConfig cfg{8, 4, 2, 15e3, 5.9e9};
  ChannelRealization ch;
  ch.paths = {{cplx(0.8, 0.3), 0, 900.0}, {cplx(-0.4, 0.2), 1, -400.0}, {cplx(0.2, 0.1), 2, 1500.0}};
  ch.pdp = {0.6, 0.3, 0.1};
  auto dt = std::make_shared<const DelayTimeChannel>(ch, cfg);
  const LinearOperator<double> G = effective_channel_operator(dt);
  const Eigen::MatrixXcd Gd = to_dense(G);
  const BlockMmseEqualizer eq(dt, 0.07);
  const Eigen::VectorXcd y = random_matrix(32, rng, 1.0).col(0);
  CHECK((eq.equalize(y) - mmse_matrix(Gd, 0.07).W * y).norm() < 1e-10 * y.norm());
}

TEST_CASE("noiseless identity channel recovers both users") {
  Rng rng(63);
  const QamConstellation c(16);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(16, 16);
  const Eigen::VectorXcd x1 = random_symbols(c, 16, rng), x2 = random_symbols(c, 16, rng);
  const auto [rho1, rho2] = ftpa_allocate(10.0, 25.0);
  const Eigen::VectorXcd y = superimpose(x1, x2, rho1, rho2);
  CHECK(mmse_sic_detect(y, I, 1, rho1, rho2, 1e-12, c, c) == x1);
  CHECK(mmse_sic_detect(y, I, 2, rho1, rho2, 1e-12, c, c) == x2);
}

TEST_CASE("User 1 on an identity channel follows the zero-threshold PAM model") {
  Rng rng(64);
  const QamConstellation c(4);
  const auto [rho1, rho2] = ftpa_allocate(0.0, 15.0);
  const double sigma2 = 0.3;
  const int n = 1024, frames = 100;
  LinearOperator<double> I;
  I.rows = I.cols = n;
  I.apply = I.apply_adjoint = [](const Eigen::VectorXcd& v) { return v; };
  const Equalizer eq = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return v / (1.0 + sigma2); };
  long long errors = 0;
  for (int f = 0; f < frames; ++f) {
    const Eigen::VectorXcd x1 = random_symbols(c, n, rng), x2 = random_symbols(c, n, rng);
    const Eigen::VectorXcd y = add_awgn(superimpose(x1, x2, rho1, rho2), sigma2, rng);
    const Eigen::VectorXcd xh = mmse_sic_detect(y, eq, I, 1, rho1, rho2, c, c);
    for (int i = 0; i < n; ++i) errors += xh[i] != x1[i];
  }
  // MSE on x1 after scaling by 1/sqrt(rho1) is sigma2/rho1; T = 0 detects everything
  const double pc = pam_probs_user1(0.0, sigma2 / rho1, c, std::sqrt(rho2 / rho1)).p_correct;
  const double ser = 1.0 - pc * pc;
  const double total = static_cast<double>(n) * frames;
  CHECK(std::abs(errors / total - ser) <= 3.0 * std::sqrt(ser * (1 - ser) / total));
}

TEST_CASE("error free at 60 dB on a well conditioned channel") {
  Rng rng(65);
  const QamConstellation c(16);
  const Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(16, 16) + random_matrix(16, rng, 0.1);
  const auto [rho1, rho2] = ftpa_allocate(60.0, 75.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXcd x1 = random_symbols(c, 16, rng), x2 = random_symbols(c, 16, rng);
    const double s1 = snr_to_sigma2(60.0), s2 = snr_to_sigma2(75.0);
    const Eigen::VectorXcd s = superimpose(x1, x2, rho1, rho2);
    CHECK(mmse_sic_detect(add_awgn(G * s, s1, rng), G, 1, rho1, rho2, s1, c, c) == x1);
    CHECK(mmse_sic_detect(add_awgn(G * s, s2, rng), G, 2, rho1, rho2, s2, c, c) == x2);
  }
}
