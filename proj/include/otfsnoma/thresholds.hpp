// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "otfsnoma/grid.hpp"
#include "otfsnoma/mlsqr.hpp"

namespace otfsnoma {

double gaussian_q(double x);

// Per-dimension (PAM) probabilities of a reliable correct decision and of a reliable
// nearest-neighbour error.
struct PamProbs {
  double p_correct = 0.0;
  double p_error = 0.0;
};

struct ProbTriple {
  double p_correct = 0.0;
  double p_error = 0.0;
  double p_undetected = 1.0;

  double p_detected() const { return p_correct + p_error; }
};

// User 1 decides on the superposition; User 2 levels are scaled by rho_ratio = sqrt(rho2/rho1)
// and share User 1's constellation order. gamma = 0 uses the analytic limits.
PamProbs pam_probs_user1(double T, double gamma, const QamConstellation& c1, double rho_ratio);
PamProbs pam_probs_user2(double T, double gamma, const QamConstellation& c2);

// d/dT of the per-dimension probabilities above.
PamProbs pam_probs_user1_dT(double T, double gamma, const QamConstellation& c1, double rho_ratio);
PamProbs pam_probs_user2_dT(double T, double gamma, const QamConstellation& c2);

// (P_C^2, 2 P_E, remainder). A negative remainder is clamped to 0 by shrinking p_error.
ProbTriple to_qam(double p_correct_pam, double p_error_pam);
ProbTriple to_qam(const PamProbs& p);

// Number of to_qam calls that had to clamp (process-wide).
std::uint64_t clamp_event_count();

struct ProbDerivative {
  double d_correct = 0.0;
  double d_error = 0.0;
};

// QAM-level probabilities and their T-derivatives for user 1 or 2.
ProbTriple user_probs(int user, double T, double gamma, const QamConstellation& c,
                      double rho_ratio);
ProbDerivative user_probs_dT(int user, double T, double gamma, const QamConstellation& c,
                             double rho_ratio);

// MSE split of one user's symbols as seen by the receiver.
struct UserMse {
  double omega = 0.0;  // undetected User 1 symbols
  double psi_u = 0.0;  // User 2 symbols whose User 1 partner is undetected
  double psi_d = 0.0;  // User 2 symbols whose User 1 partner is detected
  double w = 0.0;      // noise floor
  double gamma = 0.0;  // tracked MSE, >= w
  double gamma_raw = 0.0;  // before the floor clamp
};

struct MseTracker {
  int receiver = 1;
  double rho1 = 0.5, rho2 = 0.5;
  double e1 = 0.0, e2 = 0.0;
  QamConstellation c1, c2;
  std::array<UserMse, 2> user;     // [0]: User 1 symbols, [1]: User 2 symbols
  std::vector<ProbTriple> probs1;  // probs1[k-1] belongs to iteration k
  std::vector<ProbTriple> probs2;
  int k = 1;                       // current iteration

  double rho_ratio() const;
  double gamma1() const { return user[0].gamma; }
  double gamma2() const { return user[1].gamma; }

  // History with P^(j) = (0, 0, 1) for j <= 0.
  ProbTriple prob1(int j) const;
  ProbTriple prob2(int j) const;
};

MseTracker init_tracker(const ApproxMse<double>& mse, double rho1, double rho2, int receiver,
                        const QamConstellation& c1, const QamConstellation& c2);

// Next-iteration components given this iteration's probabilities.
UserMse evolve_user1(const MseTracker& t, const ProbTriple& p1, const ProbTriple& p2);
UserMse evolve_user2(const MseTracker& t, const ProbTriple& p1, const ProbTriple& p2);

// Evolve both users, record the probabilities, advance k.
void advance(MseTracker& t, const ProbTriple& p1, const ProbTriple& p2);

// Brent-Dekker root on [lo, hi]; throws BracketError without a sign change.
double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double tol = 1e-10);

// Threshold T in [0, 2d] with P_e(gamma_k, T) = P_e(w_floor, 0).
double solve_own_threshold(double gamma_k, double w_floor, const QamConstellation& c, int user,
                           double rho_ratio);

// Other user's threshold minimizing this receiver's next tracked MSE.
double optimize_cross_threshold(const MseTracker& t, double own_threshold);

// Unclamped next-iteration MSE of the receiver's own user as a function of the other
// user's threshold (the quantity optimize_cross_threshold minimizes).
double cross_objective(const MseTracker& t, double own_threshold, double other_threshold);
double cross_objective_dT(const MseTracker& t, double other_threshold);

}  // namespace otfsnoma
