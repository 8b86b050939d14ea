// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "otfsnoma/channel.hpp"
#include "otfsnoma/mlsqr.hpp"
#include "otfsnoma/waveform.hpp"

using namespace otfsnoma;
using Catch::Approx;

namespace {

Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd / std::sqrt(2.0));
  Eigen::MatrixXcd A(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) A(i, j) = cplx(g(rng), g(rng));
  return A;
}

MlsqrOptions exact_opts(int U, double tol = 0.0) {
  MlsqrOptions o;
  o.max_iter = U;
  o.tol = tol;
  o.mode = MseMode::Exact;
  return o;
}

Eigen::MatrixXcd gram_aug(const Eigen::MatrixXcd& G, double sigma2) {
  Eigen::MatrixXcd A = G.adjoint() * G;
  A.diagonal().array() += sigma2;
  return A;
}

}  // namespace

TEST_CASE("LSQR closed-form cases") {
  Rng rng(31);
  const Eigen::VectorXcd y = random_matrix(6, 1, rng);
  const auto id = lsqr_solve<double>(dense_operator(Eigen::MatrixXcd::Identity(6, 6)), y, 0.0, 15, 1e-2);
  CHECK((id.x - y).norm() < 1e-2);
  CHECK(id.history.iterations <= 2);

  Eigen::VectorXcd y2(2);
  y2 << 2.0, 0.0;
  const auto damped = lsqr_solve<double>(dense_operator(Eigen::MatrixXcd::Identity(2, 2)), y2, 1.0, 15, 0.0);
  CHECK(std::abs(damped.x[0] - 1.0) < 1e-12);
  CHECK(std::abs(damped.x[1]) < 1e-12);

  CHECK_THROWS_AS(lsqr_solve<double>(dense_operator(Eigen::MatrixXcd::Identity(2, 2)), y, 0.0, 5, 0.0),
                  DimensionError);
}

TEST_CASE("LSQR matches the dense ridge solution and its residual estimate") {
  Rng rng(32);
  for (int inst = 0; inst < 10; ++inst) {
    const Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(16, 16) + random_matrix(16, 16, rng, 0.1);
    const Eigen::VectorXcd y = random_matrix(16, 1, rng);
    const auto res = lsqr_solve<double>(dense_operator(G), y, 0.1, 50, 0.0);
    const Eigen::VectorXcd ref = oracle::ridge_solve(G, y, 0.1);
    CHECK((res.x - ref).norm() <= 1e-6 * ref.norm());
    CHECK(res.history.residual.back() == Approx((y - G * res.x).norm()).epsilon(1e-6).margin(1e-9));
  }
}

TEST_CASE("recursive equalizer reproduces the LSQR iterates") {
  Rng rng(33);
  const Eigen::MatrixXcd G = random_matrix(8, 8, rng) + 2.0 * Eigen::MatrixXcd::Identity(8, 8);
  const Eigen::VectorXcd y = random_matrix(8, 1, rng);
  const double sigma2 = 0.2;
  for (int U = 1; U <= 7; ++U) {
    const auto res = lsqr_solve<double>(dense_operator(G), y, sigma2, U, 0.0);
    REQUIRE(res.history.iterations == U);
    const Eigen::MatrixXcd L = exact_equalizer_recursion<double>(res.history, gram_aug(G, sigma2));
    CHECK((L * G.adjoint() * y - res.x).norm() < 1e-8 * res.x.norm());
    if (U == 1) {
      const double scale = res.history.tau[1] / (res.history.rho_bar[0] * res.history.phi_bar[0]);
      CHECK((L - scale * Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-14);
    }
    // same polynomial as the independent Krylov oracle
    CHECK((L - oracle::krylov_equalizer(G, y, sigma2, U)).norm() < 1e-8 * L.norm());
  }
}

TEST_CASE("scalar channels converge to the damped inverse") {
  const cplx c(0.6, -0.8);
  const double sigma2 = 0.25;
  const Eigen::MatrixXcd G = c * Eigen::MatrixXcd::Identity(4, 4);
  Eigen::VectorXcd y(4);
  y << 1.0, cplx(0, 1), -0.5, 2.0;
  const auto rep = mlsqr<double>(dense_operator(G), G.col(0), y, sigma2, 0.0, 0.0, exact_opts(15), 2, 2);
  const Eigen::MatrixXcd L = exact_equalizer_recursion<double>(rep.history, gram_aug(G, sigma2));
  CHECK((L - Eigen::MatrixXcd::Identity(4, 4) / (std::norm(c) + sigma2)).norm() < 1e-8);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(rep.exact->gamma[i] == Approx(sigma2 / std::norm(c)).epsilon(1e-8));
  CHECK(rep.approx->gamma == Approx(sigma2 / std::norm(c)).epsilon(1e-8));
}

TEST_CASE("identity channel without noise") {
  Eigen::VectorXcd y(4);
  y << 1.0, cplx(0, -1), 0.5, cplx(2, 1);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
  const auto rep = mlsqr<double>(dense_operator(I), I.col(0), y, 0.0, 0.5, 0.5, exact_opts(15, 1e-2), 2, 2);
  CHECK((rep.x_hat - y).norm() < 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(rep.exact->psi[i] == Approx(1.0));
    CHECK(std::abs(rep.exact->nu2[i]) < 1e-20);
    CHECK(std::abs(rep.exact->gamma[i]) < 1e-20);
  }
  CHECK(std::abs(rep.approx->gamma) < 1e-20);
}

TEST_CASE("exact MSE matches the brute-force decomposition") {
  Rng rng(34);
  for (auto [M, N] : {std::pair{2, 2}, {4, 4}}) {
    const int n = M * N;
    const Eigen::MatrixXcd G = random_matrix(n, n, rng) + Eigen::MatrixXcd::Identity(n, n);
    const Eigen::VectorXcd y = random_matrix(n, 1, rng);
    const int U = n == 4 ? 3 : 6;
    const auto rep = mlsqr<double>(dense_operator(G), G.col(0), y, 0.3, 0.0, 0.0, exact_opts(U), M, N);
    const auto ref = oracle::mse_decomposition(oracle::krylov_equalizer(G, y, 0.3, U), G, 0.3);
    CHECK((rep.exact->psi - ref.psi).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((rep.exact->nu2 - ref.nu2).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((rep.exact->gamma - ref.gamma).cwiseAbs().maxCoeff() < 1e-8 * ref.gamma.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("BCCB eigenvalues") {
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(16);
  e[0] = 1.0;
  CHECK((bccb_eigenvalues<double>(e, 4, 4).array() - cplx(1.0)).abs().maxCoeff() < 1e-15);

  Eigen::VectorXcd shift = Eigen::VectorXcd::Zero(8);
  shift[1] = 1.0;  // single path delayed one sample, N = 1
  const Eigen::VectorXcd lam = bccb_eigenvalues<double>(shift, 8, 1);
  for (int k = 0; k < 8; ++k)
    CHECK(std::abs(lam[k] - std::polar(1.0, -2 * std::numbers::pi * k / 8)) < 1e-14);

  const FrameConfig cfg{4, 8, 1, 15e3, 5.9e9};
  ChannelRealization ch;
  ch.paths = {{cplx(1.0, 0.2), 0, 0.0}, {cplx(0.4, -0.3), 1, 0.0}};
  ch.pdp = {0.5, 0.5};
  const Eigen::MatrixXcd G = build_effective_channel(build_time_domain_matrix(ch, cfg), cfg);
  const Eigen::MatrixXcd FN = oracle::dft_matrix(8), FM = oracle::dft_matrix(4);
  Eigen::MatrixXcd F(32, 32);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) F.block(4 * i, 4 * j, 4, 4) = FN(i, j) * FM;
  const Eigen::VectorXcd dense = (F * G * F.adjoint()).diagonal();
  CHECK((bccb_eigenvalues<double>(G.col(0), 4, 8) - dense).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("approximate MSE is exact for BCCB channels") {
  Rng rng(35);
  const FrameConfig cfg{4, 4, 2, 15e3, 5.9e9};
  ChannelRealization ch;
  ch.paths = {{cplx(0.8, 0.1), 0, 0.0}, {cplx(0.3, -0.4), 1, 0.0}, {cplx(-0.2, 0.2), 2, 0.0}};
  ch.pdp = {0.6, 0.3, 0.1};
  auto dt = std::make_shared<const DelayTimeChannel>(ch, cfg);
  const LinearOperator<double> G = effective_channel_operator(dt);
  const Eigen::VectorXcd y = G.apply(random_matrix(16, 1, rng)) + random_matrix(16, 1, rng, 0.1);
  const auto rep = mlsqr<double>(G, first_column(G), y, 0.05, 0.9, 0.1, exact_opts(15), 4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) {
    CHECK(rep.approx->psi == Approx(rep.exact->psi[i]).epsilon(1e-6));
    CHECK(rep.approx->nu2 == Approx(rep.exact->nu2[i]).epsilon(1e-6));
    CHECK(rep.approx->gamma == Approx(rep.exact->gamma[i]).epsilon(1e-6));
  }
  CHECK(rep.per_user_gamma[0] == Approx(rep.approx->gamma / 0.9));
  CHECK(rep.per_user_gamma[1] / rep.per_user_gamma[0] == Approx(9.0));
}

TEST_CASE("per-user MSE scaling") {
  Rng rng(36);
  const Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(4, 4) + random_matrix(4, 4, rng, 0.2);
  const Eigen::VectorXcd y = random_matrix(4, 1, rng);
  MlsqrOptions o;
  const auto half = mlsqr<double>(dense_operator(G), G.col(0), y, 0.1, 0.5, 0.5, o, 2, 2);
  CHECK(half.per_user_gamma[0] == Approx(2 * half.approx->gamma));
  CHECK(half.per_user_gamma[1] == Approx(2 * half.approx->gamma));
  const auto skew = mlsqr<double>(dense_operator(G), G.col(0), y, 0.1, 0.969, 0.031, o, 2, 2);
  CHECK(skew.per_user_gamma[1] / skew.per_user_gamma[0] == Approx(0.969 / 0.031));
}
