// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace otfsnoma::oracle {

Eigen::MatrixXcd dft_matrix(int N) {
  Eigen::MatrixXcd F(N, N);
  for (int k = 0; k < N; ++k)
    for (int n = 0; n < N; ++n)
      F(k, n) = std::polar(1.0 / std::sqrt(static_cast<double>(N)),
                           -2.0 * std::numbers::pi * k * n / N);
  return F;
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

}  // namespace

Eigen::MatrixXcd modulation_matrix(const FrameConfig& cfg) {
  const int M = cfg.M, L = cfg.M + cfg.n_cp;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L, M);
  for (int i = 0; i < L; ++i) A(i, (i - cfg.n_cp + M) % M) = 1.0;
  return kron(dft_matrix(cfg.N).adjoint(), A);
}

Eigen::MatrixXcd demodulation_matrix(const FrameConfig& cfg) {
  const int M = cfg.M, L = cfg.M + cfg.n_cp;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(M, L);
  for (int i = 0; i < M; ++i) R(i, cfg.n_cp + i) = 1.0;
  return kron(dft_matrix(cfg.N), R);
}

Eigen::VectorXcd ridge_solve(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y, double sigma2) {
  Eigen::MatrixXcd A = G.adjoint() * G;
  A.diagonal().array() += sigma2;
  return A.completeOrthogonalDecomposition().solve(G.adjoint() * y);
}

namespace {

Eigen::MatrixXcd gram_plus(const Eigen::MatrixXcd& G, double sigma2) {
  Eigen::MatrixXcd A = G.adjoint() * G;
  A.diagonal().array() += sigma2;
  return A;
}

}  // namespace

Eigen::VectorXcd krylov_iterate(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y,
                                double sigma2, int U) {
  const Eigen::MatrixXcd A = gram_plus(G, sigma2);
  const Eigen::VectorXcd b = G.adjoint() * y;
  const Eigen::Index n = b.size();
  Eigen::MatrixXcd Q(n, U);
  Q.col(0) = b.normalized();
  for (int j = 1; j < U; ++j) {
    Eigen::VectorXcd v = A * Q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    Q.col(j) = v.normalized();
  }
  const Eigen::MatrixXcd H = Q.adjoint() * A * Q;
  return Q * H.ldlt().solve(Q.adjoint() * b);
}

Eigen::MatrixXcd krylov_equalizer(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y,
                                  double sigma2, int U) {
  const Eigen::MatrixXcd A = gram_plus(G, sigma2);
  const Eigen::VectorXcd b = G.adjoint() * y;
  const Eigen::VectorXcd x = krylov_iterate(G, y, sigma2, U);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  const Eigen::MatrixXcd& V = es.eigenvectors();
  const Eigen::VectorXcd xb = V.adjoint() * x, bb = V.adjoint() * b;
  // p(lambda_i) is real for a real-coefficient polynomial
  const Eigen::VectorXd p = xb.cwiseQuotient(bb).real();
  return V * p.asDiagonal() * V.adjoint();
}

MseDecomposition mse_decomposition(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& G,
                                   double sigma2) {
  const Eigen::MatrixXcd signal = L * G.adjoint() * G;
  const Eigen::MatrixXcd noise_filter = L * G.adjoint();
  const Eigen::Index n = G.cols();
  MseDecomposition out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double interference = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
      if (m != i) interference += std::norm(signal(i, m));
    out.psi[i] = signal(i, i).real();
    out.nu2[i] = interference + sigma2 * noise_filter.row(i).squaredNorm();
    out.gamma[i] = out.nu2[i] / (out.psi[i] * out.psi[i]);
  }
  return out;
}

Eigen::MatrixXcd bccb_from_first_column(const Eigen::VectorXcd& col, int M, int N) {
  const int mn = M * N;
  Eigen::MatrixXcd B(mn, mn);
  for (int n1 = 0; n1 < N; ++n1)
    for (int m1 = 0; m1 < M; ++m1)
      for (int n2 = 0; n2 < N; ++n2)
        for (int m2 = 0; m2 < M; ++m2)
          B(m1 + M * n1, m2 + M * n2) = col[((m1 - m2 + M) % M) + M * ((n1 - n2 + N) % N)];
  return B;
}

PamFrequencies simulate_pam_decision(int user, double T, double gamma, const QamConstellation& c,
                                     double rho_ratio, long long draws, Rng& rng) {
  const Eigen::VectorXd& lv = c.pam_levels();
  const int s = static_cast<int>(lv.size());
  const double d = c.half_distance();
  std::uniform_int_distribution<int> pick(0, s - 1);
  std::normal_distribution<double> noise(0.0, std::sqrt(gamma / 2.0));
  long long correct = 0, error = 0;
  for (long long t = 0; t < draws; ++t) {
    const int i = pick(rng);
    double u = lv[i] + noise(rng);
    if (user == 1) u += rho_ratio * lv[pick(rng)];
    // nearest of the s - 1 boundaries (2a) d, a = -(s/2 - 1) .. s/2 - 1
    const double a = std::clamp(std::round(u / (2.0 * d)), -(s / 2 - 1.0), s / 2 - 1.0);
    if (std::abs(u - 2.0 * a * d) < T / 2.0) continue;
    const int j = std::clamp(static_cast<int>(std::floor(u / (2.0 * d) + s / 2.0)), 0, s - 1);
    if (j == i) ++correct;
    else if (std::abs(j - i) == 1) ++error;
  }
  return {static_cast<double>(correct) / draws, static_cast<double>(error) / draws, draws};
}

double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int n) {
  double best_x = lo, best_v = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace otfsnoma::oracle
