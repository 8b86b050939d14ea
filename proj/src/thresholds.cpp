// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/thresholds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

namespace otfsnoma {

namespace {

std::atomic<std::uint64_t> clamp_events{0};

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Q(num / sqrt(gamma/2)), with the gamma -> 0 limit.
double q_of(double num, double gamma) {
  if (gamma == 0.0) return num > 0.0 ? 0.0 : (num < 0.0 ? 1.0 : 0.5);
  return gaussian_q(num / std::sqrt(0.5 * gamma));
}

// -d/dnum Q(num / sqrt(gamma/2)) = exp(-num^2/gamma) / sqrt(pi gamma)
double dens(double num, double gamma) {
  if (gamma == 0.0) return 0.0;
  return std::exp(-num * num / gamma) / std::sqrt(std::numbers::pi * gamma);
}

void check_inputs(double T, double gamma) {
  if (T < 0.0) throw std::domain_error("threshold must be >= 0");
  if (!(gamma >= 0.0)) throw std::domain_error("MSE must be >= 0");
}

}  // namespace

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

PamProbs pam_probs_user1(double T, double gamma, const QamConstellation& c1, double rho_ratio) {
  check_inputs(T, gamma);
  const double s = c1.side(), A = c1.order(), d = c1.half_distance();
  double sum_c = 0.0, sum_e = 0.0;
  for (int l = 1; l <= c1.side() / 2; ++l) {
    const double off = (2 * l - 1) * rho_ratio;
    sum_c += q_of(d * (1 - off) - T / 2, gamma) + q_of(d * (1 + off) - T / 2, gamma);
    sum_e += (s - 1) * (q_of(d * (1 - off) + T / 2, gamma) + q_of(d * (1 + off) + T / 2, gamma)) -
             (s - 2) * (q_of(d * (3 - off) - T / 2, gamma) + q_of(d * (3 + off) - T / 2, gamma));
  }
  return {clamp01(1.0 - 2.0 * (s - 1) / A * sum_c), clamp01(2.0 / A * sum_e)};
}

PamProbs pam_probs_user2(double T, double gamma, const QamConstellation& c2) {
  check_inputs(T, gamma);
  const double s = c2.side(), d = c2.half_distance();
  const double pc = 1.0 - 2.0 * (s - 1) / s * q_of(d - T / 2, gamma);
  const double pe = 2.0 / s * ((s - 1) * q_of(d + T / 2, gamma) - (s - 2) * q_of(3 * d - T / 2, gamma));
  return {clamp01(pc), clamp01(pe)};
}

PamProbs pam_probs_user1_dT(double T, double gamma, const QamConstellation& c1, double rho_ratio) {
  check_inputs(T, gamma);
  const double s = c1.side(), A = c1.order(), d = c1.half_distance();
  double sum_c = 0.0, sum_e = 0.0;
  for (int l = 1; l <= c1.side() / 2; ++l) {
    const double off = (2 * l - 1) * rho_ratio;
    // d/dT Q((x - T/2)/sigma) = dens/2, d/dT Q((x + T/2)/sigma) = -dens/2
    sum_c += 0.5 * (dens(d * (1 - off) - T / 2, gamma) + dens(d * (1 + off) - T / 2, gamma));
    sum_e += -(s - 1) * 0.5 * (dens(d * (1 - off) + T / 2, gamma) + dens(d * (1 + off) + T / 2, gamma)) -
             (s - 2) * 0.5 * (dens(d * (3 - off) - T / 2, gamma) + dens(d * (3 + off) - T / 2, gamma));
  }
  return {-2.0 * (s - 1) / A * sum_c, 2.0 / A * sum_e};
}

PamProbs pam_probs_user2_dT(double T, double gamma, const QamConstellation& c2) {
  check_inputs(T, gamma);
  const double s = c2.side(), d = c2.half_distance();
  const double dpc = -2.0 * (s - 1) / s * 0.5 * dens(d - T / 2, gamma);
  const double dpe = 2.0 / s * (-(s - 1) * 0.5 * dens(d + T / 2, gamma) -
                                (s - 2) * 0.5 * dens(3 * d - T / 2, gamma));
  return {dpc, dpe};
}

ProbTriple to_qam(double p_correct_pam, double p_error_pam) {
  ProbTriple t;
  t.p_correct = clamp01(p_correct_pam * p_correct_pam);
  t.p_error = clamp01(2.0 * p_error_pam);
  t.p_undetected = 1.0 - t.p_correct - t.p_error;
  if (t.p_undetected < 0.0) {
    clamp_events.fetch_add(1, std::memory_order_relaxed);
    t.p_undetected = 0.0;
    t.p_error = 1.0 - t.p_correct;
  }
  return t;
}

ProbTriple to_qam(const PamProbs& p) { return to_qam(p.p_correct, p.p_error); }

std::uint64_t clamp_event_count() { return clamp_events.load(std::memory_order_relaxed); }

ProbTriple user_probs(int user, double T, double gamma, const QamConstellation& c,
                      double rho_ratio) {
  return to_qam(user == 1 ? pam_probs_user1(T, gamma, c, rho_ratio) : pam_probs_user2(T, gamma, c));
}

ProbDerivative user_probs_dT(int user, double T, double gamma, const QamConstellation& c,
                             double rho_ratio) {
  const PamProbs p =
      user == 1 ? pam_probs_user1(T, gamma, c, rho_ratio) : pam_probs_user2(T, gamma, c);
  const PamProbs dp = user == 1 ? pam_probs_user1_dT(T, gamma, c, rho_ratio)
                                : pam_probs_user2_dT(T, gamma, c);
  const double d_correct = 2.0 * p.p_correct * dp.p_correct;
  // on the clamped branch of to_qam the error probability is 1 - P_c
  if (p.p_correct * p.p_correct + 2.0 * p.p_error > 1.0) return {d_correct, -d_correct};
  return {d_correct, 2.0 * dp.p_error};
}

double MseTracker::rho_ratio() const { return std::sqrt(rho2 / rho1); }

ProbTriple MseTracker::prob1(int j) const {
  if (j <= 0) return {};
  return probs1.at(static_cast<std::size_t>(j - 1));
}

ProbTriple MseTracker::prob2(int j) const {
  if (j <= 0) return {};
  return probs2.at(static_cast<std::size_t>(j - 1));
}

MseTracker init_tracker(const ApproxMse<double>& mse, double rho1, double rho2, int receiver,
                        const QamConstellation& c1, const QamConstellation& c2) {
  if (receiver != 1 && receiver != 2) throw std::invalid_argument("receiver must be 1 or 2");
  MseTracker t;
  t.receiver = receiver;
  t.rho1 = rho1;
  t.rho2 = rho2;
  t.c1 = c1;
  t.c2 = c2;
  t.e1 = c1.interferer_energy();
  t.e2 = c2.interferer_energy();
  const double psi2 = mse.psi * mse.psi;
  for (int j = 0; j < 2; ++j) {
    const double rho_j = j == 0 ? rho1 : rho2;
    UserMse& u = t.user[j];
    if (psi2 == 0.0) {
      const double inf = std::numeric_limits<double>::infinity();
      u.omega = u.psi_u = u.w = u.gamma = u.gamma_raw = inf;
      continue;
    }
    u.omega = rho1 / (rho_j * psi2) * mse.interference_sum;
    u.psi_u = rho2 / (rho_j * psi2) * mse.interference_sum;
    u.psi_d = 0.0;
    u.w = mse.noise_term / (rho_j * psi2);
    u.gamma = u.gamma_raw = u.omega + u.psi_u + u.w;
  }
  return t;
}

namespace {

// Shared component update; only the gamma expression differs between users.
UserMse evolve_components(const MseTracker& t, const UserMse& u, const ProbTriple& p1,
                          const ProbTriple& p2) {
  const int k = t.k;
  UserMse n = u;
  n.omega = u.omega * p1.p_undetected;
  n.psi_u = u.psi_u * t.prob2(k - 1).p_undetected;
  n.psi_d = u.psi_d + u.psi_u * t.prob1(k - 1).p_detected() * p2.p_undetected -
            u.psi_d * p2.p_detected();
  return n;
}

}  // namespace

UserMse evolve_user1(const MseTracker& t, const ProbTriple& p1, const ProbTriple& p2) {
  const UserMse& u = t.user[0];
  UserMse n = evolve_components(t, u, p1, p2);
  const double x = u.psi_u * t.prob1(t.k - 1).p_detected() + u.psi_d;
  n.gamma_raw = u.gamma - u.omega * p1.p_correct + (t.e1 - 1.0) * u.omega * p1.p_error -
                x * p2.p_correct + (t.e2 - 1.0) * x * p2.p_error;
  n.gamma = std::max(n.gamma_raw, u.w);
  return n;
}

UserMse evolve_user2(const MseTracker& t, const ProbTriple& p1, const ProbTriple& p2) {
  const UserMse& u = t.user[1];
  UserMse n = evolve_components(t, u, p1, p2);
  const double pu1 = t.k == 1 ? 1.0 : t.prob1(1).p_undetected;
  const double x = u.psi_u * t.prob1(t.k - 1).p_detected() + u.psi_d;
  n.gamma_raw = u.gamma - u.omega * p1.p_correct +
                ((t.e1 - 1.0) * u.omega + t.rho2 / t.rho1 * t.e1 * pu1) * p1.p_error -
                x * p2.p_correct + (t.e2 - 1.0) * x * p2.p_error;
  n.gamma = std::max(n.gamma_raw, u.w);
  return n;
}

void advance(MseTracker& t, const ProbTriple& p1, const ProbTriple& p2) {
  const UserMse n1 = evolve_user1(t, p1, p2);
  const UserMse n2 = evolve_user2(t, p1, p2);
  t.user[0] = n1;
  t.user[1] = n2;
  t.probs1.push_back(p1);
  t.probs2.push_back(p2);
  ++t.k;
}

double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double a = lo, b = hi, fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw BracketError("brent_root: no sign change on bracket");
  double c = a, fc = fa, d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return b;
}

double solve_own_threshold(double gamma_k, double w_floor, const QamConstellation& c, int user,
                           double rho_ratio) {
  if (!(w_floor >= 0.0) || gamma_k < w_floor * (1.0 - 1e-12))
    throw std::domain_error("solve_own_threshold: need gamma_k >= w_floor >= 0");
  const double t_max = 2.0 * c.half_distance();
  auto pe = [&](double g, double T) { return user_probs(user, T, g, c, rho_ratio).p_error; };
  const double target = pe(w_floor, 0.0);
  auto f = [&](double T) { return pe(gamma_k, T) - target; };
  if (f(0.0) <= 0.0) return 0.0;
  if (f(t_max) > 0.0) return t_max;
  return brent_root(f, 0.0, t_max);
}

double cross_objective(const MseTracker& t, double own_threshold, double other_threshold) {
  const double r = t.rho_ratio();
  if (t.receiver == 1) {
    const ProbTriple p1 = user_probs(1, own_threshold, t.gamma1(), t.c1, r);
    const ProbTriple p2 = user_probs(2, other_threshold, t.gamma2(), t.c2, r);
    return evolve_user1(t, p1, p2).gamma_raw;
  }
  const ProbTriple p1 = user_probs(1, other_threshold, t.gamma1(), t.c1, r);
  const ProbTriple p2 = user_probs(2, own_threshold, t.gamma2(), t.c2, r);
  return evolve_user2(t, p1, p2).gamma_raw;
}

double cross_objective_dT(const MseTracker& t, double other_threshold) {
  const double r = t.rho_ratio();
  if (t.receiver == 1) {
    const UserMse& u = t.user[0];
    const double x = u.psi_u * t.prob1(t.k - 1).p_detected() + u.psi_d;
    const ProbDerivative dp = user_probs_dT(2, other_threshold, t.gamma2(), t.c2, r);
    return x * ((t.e2 - 1.0) * dp.d_error - dp.d_correct);
  }
  const UserMse& u = t.user[1];
  const double pu1 = t.k == 1 ? 1.0 : t.prob1(1).p_undetected;
  const double coef = (t.e1 - 1.0) * u.omega + t.rho2 / t.rho1 * t.e1 * pu1;
  const ProbDerivative dp = user_probs_dT(1, other_threshold, t.gamma1(), t.c1, r);
  return coef * dp.d_error - u.omega * dp.d_correct;
}

double optimize_cross_threshold(const MseTracker& t, double own_threshold) {
  const QamConstellation& other = t.receiver == 1 ? t.c2 : t.c1;
  const double t_max = 2.0 * other.half_distance();
  auto obj = [&](double T) { return cross_objective(t, own_threshold, T); };
  auto grad = [&](double T) { return cross_objective_dT(t, T); };

  // candidates: both endpoints and every stationary point found on a coarse scan
  double best_t = 0.0, best_v = obj(0.0);
  auto consider = [&](double T) {
    const double v = obj(T);
    if (v < best_v) {
      best_v = v;
      best_t = T;
    }
  };
  // the to_qam clamp puts a kink in the objective where it releases; scan each smooth piece
  const int other_user = t.receiver == 1 ? 2 : 1;
  const double other_gamma = t.receiver == 1 ? t.gamma2() : t.gamma1();
  auto clamped = [&](double T) {
    const PamProbs p = other_user == 1 ? pam_probs_user1(T, other_gamma, other, t.rho_ratio())
                                       : pam_probs_user2(T, other_gamma, other);
    return p.p_correct * p.p_correct + 2.0 * p.p_error > 1.0;
  };
  auto scan_piece = [&](double lo, double hi) {
    constexpr int scan = 64;
    double t_prev = lo, g_prev = grad(lo);
    for (int i = 1; i <= scan; ++i) {
      const double ti = lo + (hi - lo) * i / scan;
      const double gi = grad(ti);
      if ((g_prev < 0.0 && gi > 0.0) || (g_prev > 0.0 && gi < 0.0))
        consider(brent_root(grad, t_prev, ti));
      g_prev = gi;
      t_prev = ti;
    }
  };
  if (clamped(0.0) != clamped(t_max)) {
    double lo = 0.0, hi = t_max;
    for (int i = 0; i < 100 && hi - lo > 1e-15 * t_max; ++i) {
      const double mid = 0.5 * (lo + hi);
      (clamped(mid) == clamped(0.0) ? lo : hi) = mid;
    }
    consider(lo);
    consider(hi);
    scan_piece(0.0, lo);
    scan_piece(hi, t_max);
  } else {
    scan_piece(0.0, t_max);
  }
  consider(t_max);
  return best_t;
}

}  // namespace otfsnoma
