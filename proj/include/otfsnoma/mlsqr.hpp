// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "otfsnoma/detail/fft.hpp"
#include "otfsnoma/linear_operator.hpp"
#include "otfsnoma/types.hpp"

namespace otfsnoma {

// Scalars of damped LSQR on A = [G; sigma I], b = [y; 0]. Entry 0 holds the initialization
// (alpha_0, beta_0, rho_bar_0 = alpha_0, phi_bar_0 = beta_0, tau_0 = 1, mu_0 = 0).
template <typename Real>
struct LsqrHistory {
  std::vector<Real> alpha, beta, rho, rho_bar, phi, phi_bar, tau, mu, c, s, theta;
  std::vector<Real> residual;  // ||y - G x_u||
  int iterations = 0;
  bool breakdown = false;

  // rho_bar_u * phi_bar_u with the value 1 for u < 0
  Real kappa(int u) const { return u < 0 ? Real(1) : rho_bar[u] * phi_bar[u]; }
  Real mu_at(int u) const { return u <= 0 ? Real(0) : mu[u]; }
};

template <typename Real>
struct LsqrResult {
  CVector<Real> x;
  LsqrHistory<Real> history;
};

template <typename Real>
LsqrResult<Real> lsqr_solve(const LinearOperator<Real>& G, const CVector<Real>& y, Real sigma2,
                            int max_iter, Real tol) {
  if (y.size() != G.rows) throw DimensionError("lsqr_solve: y length does not match G rows");
  if (sigma2 < 0) throw std::invalid_argument("lsqr_solve: negative damping");
  if (max_iter < 1) throw std::invalid_argument("lsqr_solve: max_iter must be >= 1");

  const Real sigma = std::sqrt(sigma2);
  const Real small = Real(1e4) * std::numeric_limits<Real>::epsilon();
  LsqrResult<Real> out;
  auto& h = out.history;
  auto push = [&h](Real a, Real b, Real r, Real rb, Real p, Real pb, Real t, Real m, Real cc,
                   Real ss, Real th, Real res) {
    h.alpha.push_back(a);
    h.beta.push_back(b);
    h.rho.push_back(r);
    h.rho_bar.push_back(rb);
    h.phi.push_back(p);
    h.phi_bar.push_back(pb);
    h.tau.push_back(t);
    h.mu.push_back(m);
    h.c.push_back(cc);
    h.s.push_back(ss);
    h.theta.push_back(th);
    h.residual.push_back(res);
  };

  const Eigen::Index n = G.cols;
  out.x = CVector<Real>::Zero(n);

  // u = [u_top; u_bot] in the augmented space
  Real beta = y.norm();
  if (!(beta > 0)) {
    push(0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0);
    h.breakdown = true;
    return out;
  }
  CVector<Real> u_top = y / beta;
  CVector<Real> u_bot = CVector<Real>::Zero(n);
  CVector<Real> v = G.apply_adjoint(u_top);
  Real alpha = v.norm();
  if (!(alpha > small * beta)) {
    push(alpha, beta, 0, alpha, 0, beta, 1, 0, 0, 0, 0, beta);
    h.breakdown = true;
    return out;
  }
  v /= alpha;
  CVector<Real> w = v;
  Real phi_bar = beta, rho_bar = alpha;
  push(alpha, beta, 0, rho_bar, 0, phi_bar, 1, 0, 0, 0, 0, beta);

  Real x_norm2 = 0;
  for (int u = 1; u <= max_iter; ++u) {
    // bidiagonalization
    CVector<Real> t_top = G.apply(v);
    const Real av_norm = std::sqrt(t_top.squaredNorm() + sigma2 * v.squaredNorm());
    t_top -= alpha * u_top;
    CVector<Real> t_bot = sigma * v - alpha * u_bot;
    beta = std::sqrt(t_top.squaredNorm() + t_bot.squaredNorm());
    bool stop = false;
    if (!(beta > small * av_norm)) {
      beta = 0;
      alpha = 0;
      stop = true;
    } else {
      u_top = t_top / beta;
      u_bot = t_bot / beta;
      CVector<Real> t = G.apply_adjoint(u_top) + sigma * u_bot;
      const Real au_norm = t.norm();
      t -= beta * v;
      alpha = t.norm();
      if (!(alpha > small * au_norm)) {
        alpha = 0;
        stop = true;
      } else {
        v = t / alpha;
      }
    }

    // plane rotation
    const Real rho = std::hypot(rho_bar, beta);
    const Real c = rho_bar / rho;
    const Real s = beta / rho;
    const Real theta = s * alpha;
    const Real phi = c * phi_bar;
    const Real tau = phi / rho;
    const Real mu = theta / rho;
    phi_bar = s * phi_bar;
    rho_bar = -c * alpha;

    out.x += tau * w;
    w = v - mu * w;

    x_norm2 = out.x.squaredNorm();
    const Real res2 = phi_bar * phi_bar - sigma2 * x_norm2;
    const Real res = std::sqrt(std::max(res2, Real(0)));
    push(alpha, beta, rho, rho_bar, phi, phi_bar, tau, mu, c, s, theta, res);
    h.iterations = u;
    if (stop) {
      h.breakdown = true;
      break;
    }
    if (res <= tol) break;
  }
  return out;
}

// Coefficients of L_u = L_{u-1} + (a I - b Z_A)(L_{u-1} - L_{u-2}) + c (L_{u-2} - L_{u-3}).
template <typename Real>
struct RecursionStep {
  Real identity;
  Real gram;
  Real previous;
};

template <typename Real>
Real equalizer_initial_scale(const LsqrHistory<Real>& h) {
  return h.tau[1] / h.kappa(0);
}

template <typename Real>
RecursionStep<Real> equalizer_recursion_step(const LsqrHistory<Real>& h, int u) {
  const Real k1 = h.kappa(u - 1), k2 = h.kappa(u - 2), k3 = h.kappa(u - 3);
  const Real t = h.tau[u];
  const Real m1 = h.mu_at(u - 1), m2 = h.mu_at(u - 2);
  RecursionStep<Real> r;
  r.identity = t * k2 * (1 + m1 * m1) / (h.tau[u - 1] * k1);
  r.gram = t / k1;
  r.previous = u >= 3 ? -m2 * m2 * t * k3 / (h.tau[u - 2] * k1) : Real(0);
  return r;
}

// Dense L_u with x_u = L_u G^H y. gram_aug = A^H A = G^H G + sigma^2 I.
template <typename Real>
CMatrix<Real> exact_equalizer_recursion(const LsqrHistory<Real>& h, const CMatrix<Real>& gram_aug,
                                        int u_used = -1, Eigen::Index cap = 256) {
  const Eigen::Index n = gram_aug.rows();
  if (n > cap)
    throw std::length_error("exact_equalizer_recursion: MN = " + std::to_string(n) +
                            " exceeds cap " + std::to_string(cap));
  const int U = u_used < 0 ? h.iterations : std::min(u_used, h.iterations);
  CMatrix<Real> L1 = CMatrix<Real>::Zero(n, n);  // L_{u-1}
  if (U == 0) return L1;
  CMatrix<Real> L2 = L1, L3 = L1;                // L_{u-2}, L_{u-3}
  L1.diagonal().setConstant(equalizer_initial_scale(h));
  for (int u = 2; u <= U; ++u) {
    const auto st = equalizer_recursion_step(h, u);
    CMatrix<Real> diff = L1 - L2;
    CMatrix<Real> next = L1 + st.identity * diff;
    next.noalias() -= st.gram * (gram_aug * diff);
    if (st.previous != Real(0)) next += st.previous * (L2 - L3);
    L3 = std::move(L2);
    L2 = std::move(L1);
    L1 = std::move(next);
  }
  return L1;
}

template <typename Real>
struct ExactMse {
  RVector<Real> psi;    // B[n,n]
  RVector<Real> nu2;    // sum_{m != n} |B[n,m]|^2 + sigma^2 C[n,n]
  RVector<Real> gamma;  // nu2 / psi^2, +inf when psi = 0
};

// B = L G^H G, C = B L^H.
template <typename Real>
ExactMse<Real> exact_mse(const CMatrix<Real>& L, const CMatrix<Real>& G, Real sigma2) {
  const CMatrix<Real> B = L * (G.adjoint() * G);
  const CMatrix<Real> C = B * L.adjoint();
  const Eigen::Index n = B.rows();
  ExactMse<Real> r;
  r.psi.resize(n);
  r.nu2.resize(n);
  r.gamma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.psi[i] = B(i, i).real();
    r.nu2[i] = B.row(i).squaredNorm() - std::norm(B(i, i)) + sigma2 * C(i, i).real();
    r.gamma[i] = r.psi[i] == Real(0) ? std::numeric_limits<Real>::infinity()
                                     : r.nu2[i] / (r.psi[i] * r.psi[i]);
  }
  return r;
}

// Eigenvalues of a BCCB matrix from its first column (unnormalized 2D DFT of the M x N grid).
template <typename Real>
CVector<Real> bccb_eigenvalues(const CVector<Real>& first_col, int M, int N) {
  if (first_col.size() != static_cast<Eigen::Index>(M) * N)
    throw DimensionError("bccb_eigenvalues: first column length must be M*N");
  return detail::dft2_unnormalized<Real>(first_col, M, N);
}

template <typename Real>
struct ApproxMse {
  Real psi = 0;
  Real nu2 = 0;
  Real gamma = 0;
  Real interference_sum = 0;  // sum_{m >= 2} |B~[1,m]|^2
  Real noise_term = 0;        // C~[1,1] sigma^2
};

// Diagonal-domain recursion. Lambda_L is real, so Lambda_C = Lambda_L^2 |Lambda_G|^2.
template <typename Real>
RVector<Real> approx_equalizer_diagonal(const LsqrHistory<Real>& h, const RVector<Real>& lambda_a,
                                        int u_used = -1) {
  const Eigen::Index n = lambda_a.size();
  const int U = u_used < 0 ? h.iterations : std::min(u_used, h.iterations);
  RVector<Real> L1 = RVector<Real>::Zero(n);
  if (U == 0) return L1;
  RVector<Real> L2 = L1, L3 = L1;
  L1.setConstant(equalizer_initial_scale(h));
  for (int u = 2; u <= U; ++u) {
    const auto st = equalizer_recursion_step(h, u);
    RVector<Real> diff = L1 - L2;
    RVector<Real> next = L1 + (st.identity - st.gram * lambda_a.array()).matrix().cwiseProduct(diff);
    if (st.previous != Real(0)) next += st.previous * (L2 - L3);
    L3 = std::move(L2);
    L2 = std::move(L1);
    L1 = std::move(next);
  }
  return L1;
}

template <typename Real>
ApproxMse<Real> approx_mse(const LsqrHistory<Real>& h, const CVector<Real>& lambda_g, Real sigma2,
                           int M, int N, int u_used = -1) {
  const Eigen::Index mn = static_cast<Eigen::Index>(M) * N;
  if (lambda_g.size() != mn) throw DimensionError("approx_mse: eigenvalue grid must be M*N");
  const RVector<Real> g2 = lambda_g.cwiseAbs2();
  const RVector<Real> lambda_a = g2.array() + sigma2;
  const RVector<Real> lambda_l = approx_equalizer_diagonal(h, lambda_a, u_used);
  const CVector<Real> lambda_b = lambda_l.cwiseProduct(g2).template cast<std::complex<Real>>();
  const RVector<Real> lambda_c = lambda_l.cwiseAbs2().cwiseProduct(g2);

  // row 1 of F^H Lambda F = (1/MN) DFT2(Lambda)
  const CVector<Real> b_row = detail::dft2_unnormalized<Real>(lambda_b, M, N) / Real(mn);
  ApproxMse<Real> r;
  r.psi = b_row[0].real();
  r.interference_sum = b_row.tail(mn - 1).squaredNorm();
  r.noise_term = sigma2 * lambda_c.mean();
  r.nu2 = r.interference_sum + r.noise_term;
  r.gamma = r.psi == Real(0) ? std::numeric_limits<Real>::infinity() : r.nu2 / (r.psi * r.psi);
  return r;
}

enum class MseMode { Exact, Approx };

struct MlsqrOptions {
  int max_iter = 15;     // U
  double tol = 1e-2;     // epsilon on ||y - G x_u||
  MseMode mode = MseMode::Approx;
  Eigen::Index exact_cap = 256;
};

template <typename Real>
struct SolverReport {
  CVector<Real> x_hat;
  int iterations_used = 0;
  Real residual_norm = 0;
  bool breakdown = false;
  LsqrHistory<Real> history;
  std::optional<ApproxMse<Real>> approx;  // always filled
  std::optional<ExactMse<Real>> exact;    // exact mode only
  std::array<Real, 2> per_user_gamma{};   // gamma~ / rho_j
};

// LSQR solve plus post-equalization MSE. Approx mode needs only the first column of G.
template <typename Real>
SolverReport<Real> mlsqr(const LinearOperator<Real>& G, const CVector<Real>& g_first_col,
                         const CVector<Real>& y, Real sigma2, Real rho1, Real rho2,
                         const MlsqrOptions& opts, int M, int N) {
  auto res = lsqr_solve<Real>(G, y, sigma2, opts.max_iter, static_cast<Real>(opts.tol));
  SolverReport<Real> rep;
  rep.x_hat = std::move(res.x);
  rep.history = std::move(res.history);
  rep.iterations_used = rep.history.iterations;
  rep.residual_norm = rep.history.residual.back();
  rep.breakdown = rep.history.breakdown;

  const CVector<Real> lambda_g = bccb_eigenvalues<Real>(g_first_col, M, N);
  rep.approx = approx_mse<Real>(rep.history, lambda_g, sigma2, M, N);
  if (opts.mode == MseMode::Exact) {
    const CMatrix<Real> Gd = to_dense(G);
    CMatrix<Real> gram = Gd.adjoint() * Gd;
    gram.diagonal().array() += sigma2;
    const CMatrix<Real> L = exact_equalizer_recursion<Real>(rep.history, gram, -1, opts.exact_cap);
    rep.exact = exact_mse<Real>(L, Gd, sigma2);
  }
  if (rho1 > 0 && rho2 > 0) {
    rep.per_user_gamma[0] = rep.approx->gamma / rho1;
    rep.per_user_gamma[1] = rep.approx->gamma / rho2;
  }
  return rep;
}

}  // namespace otfsnoma
