// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/detector.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace otfsnoma {

void DetectorConfig::validate() const {
  if (user != 1 && user != 2) throw ConfigError("detector: user must be 1 or 2");
  if (K < 1) throw ConfigError("detector: K must be >= 1");
  if (!(naive_start_factor > 0.0)) throw ConfigError("detector: naive_start_factor must be > 0");
  if (solver.max_iter < 1) throw ConfigError("detector: solver iterations must be >= 1");
  if (!(solver.tol >= 0.0)) throw ConfigError("detector: solver tolerance must be >= 0");
}

RzPartition rz_partition(const Eigen::VectorXcd& x_tilde, const std::vector<int>& indices,
                         double T, const QamConstellation& c, ZoneRule rule) {
  if (T < 0.0) throw std::domain_error("rz_partition: threshold must be >= 0");
  RzPartition out;
  for (int n : indices) {
    if (unreliable_zone_contains(x_tilde[n], T, c, rule)) continue;
    out.reliable.push_back(n);
    out.quantized.push_back(quantize(x_tilde[n], c));
  }
  return out;
}

Eigen::VectorXcd cancel_interference(const Eigen::VectorXcd& y_k, const LinearOperator<double>& G,
                                     const Eigen::VectorXcd& xq1, const Eigen::VectorXcd& xq2,
                                     double rho1, double rho2) {
  return y_k - G.apply(std::sqrt(rho1) * xq1 + std::sqrt(rho2) * xq2);
}

double naive_threshold(int k, int K, double d, double start_factor) {
  if (k < 1 || k > K) throw std::domain_error("naive_threshold: need 1 <= k <= K");
  return start_factor * d * (1.0 - static_cast<double>(k) / K);
}

namespace {

std::vector<int> mask_indices(const std::vector<std::uint8_t>& mask, bool value) {
  std::vector<int> idx;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (static_cast<bool>(mask[n]) == value) idx.push_back(static_cast<int>(n));
  return idx;
}

ProbTriple empirical_triple(const ProbTriple& analytic, std::size_t reliable, std::size_t candidates) {
  if (candidates == 0) return analytic;
  const double pd = static_cast<double>(reliable) / static_cast<double>(candidates);
  const double split = analytic.p_detected() > 0.0 ? analytic.p_correct / analytic.p_detected() : 1.0;
  ProbTriple t;
  t.p_correct = pd * split;
  t.p_error = pd - t.p_correct;
  t.p_undetected = 1.0 - pd;
  return t;
}

}  // namespace

DetectionResult detect(const LinearOperator<double>& G, const Eigen::VectorXcd& g_first_col,
                       int M, int N, const Eigen::VectorXcd& y, double rho1, double rho2,
                       double sigma2, const DetectorConfig& cfg, const QamConstellation& c1,
                       const QamConstellation& c2) {
  cfg.validate();
  const Eigen::Index mn = static_cast<Eigen::Index>(M) * N;
  if (y.size() != mn || G.rows != mn || G.cols != mn || g_first_col.size() != mn)
    throw DimensionError("detect: y, G and first column must all have size M*N = " +
                         std::to_string(mn));
  if (!(rho1 > rho2 && rho2 > 0.0)) throw std::invalid_argument("detect: need rho1 > rho2 > 0");

  const double sr1 = std::sqrt(rho1), sr2 = std::sqrt(rho2);
  const double ratio = std::sqrt(rho2 / rho1);
  const std::size_t n_sym = static_cast<std::size_t>(mn);

  DetectionResult res;
  res.x_hat1 = Eigen::VectorXcd::Zero(mn);
  res.x_hat2 = Eigen::VectorXcd::Zero(mn);
  std::vector<std::uint8_t> det1(n_sym, 0), det2(n_sym, 0);

  Eigen::VectorXcd y_k = y;
  Eigen::VectorXcd x_sup = Eigen::VectorXcd::Zero(mn);
  std::vector<std::uint8_t> gate_last(n_sym, 0);  // D1 used for the last solve
  double scale_last = 1.0;
  MseTracker tracker;
  bool tracker_ok = false;

  for (int k = 1; k <= cfg.K; ++k) {
    const auto rep = mlsqr<double>(G, g_first_col, y_k, sigma2, rho1, rho2, cfg.solver, M, N);
    ++res.solver_calls;
    x_sup = rep.x_hat;
    const double psi = rep.approx->psi;
    const double scale = cfg.unbiased_scaling && psi > 0.0 && std::isfinite(psi) ? psi : 1.0;
    scale_last = scale;
    gate_last = det1;

    if (k == 1) {
      tracker = init_tracker(*rep.approx, rho1, rho2, cfg.user, c1, c2);
      tracker_ok = std::isfinite(tracker.gamma1()) && std::isfinite(tracker.gamma2());
    } else if (cfg.refresh_gamma_from_solver && tracker_ok && std::isfinite(rep.per_user_gamma[0])) {
      tracker.user[0].gamma = std::max(rep.per_user_gamma[0], tracker.user[0].w);
      tracker.user[1].gamma = std::max(rep.per_user_gamma[1], tracker.user[1].w);
    }

    // candidates: N1, and N2 restricted to D1
    const std::vector<int> cand1 = mask_indices(det1, false);
    std::vector<int> cand2;
    for (std::size_t n = 0; n < n_sym; ++n)
      if (!det2[n] && det1[n]) cand2.push_back(static_cast<int>(n));

    const Eigen::VectorXcd x1 = x_sup / (sr1 * scale);
    const Eigen::VectorXcd x2 = x_sup / (sr2 * scale);

    double T1, T2;
    if (cfg.policy == ThresholdPolicy::Naive || !tracker_ok) {
      T1 = naive_threshold(k, cfg.K, c1.half_distance(), cfg.naive_start_factor);
      T2 = naive_threshold(k, cfg.K, c2.half_distance(), cfg.naive_start_factor);
    } else if (cfg.user == 1) {
      T1 = solve_own_threshold(tracker.gamma1(), tracker.user[0].w, c1, 1, ratio);
      T2 = optimize_cross_threshold(tracker, T1);
    } else {
      T2 = solve_own_threshold(tracker.gamma2(), tracker.user[1].w, c2, 2, ratio);
      T1 = optimize_cross_threshold(tracker, T2);
    }

    const RzPartition r1 = rz_partition(x1, cand1, T1, c1, cfg.zone_rule);
    const RzPartition r2 = rz_partition(x2, cand2, T2, c2, cfg.zone_rule);

    if (cfg.record_trace) {
      IterationTrace tr;
      tr.undetected1.resize(n_sym);
      tr.undetected2.resize(n_sym);
      for (std::size_t n = 0; n < n_sym; ++n) {
        tr.undetected1[n] = !det1[n];
        tr.undetected2[n] = !det2[n];
      }
      tr.detected1 = det1;
      tr.reliable1 = r1.reliable;
      tr.reliable2 = r2.reliable;
      res.trace.push_back(std::move(tr));
    }

    Eigen::VectorXcd xq1 = Eigen::VectorXcd::Zero(mn), xq2 = Eigen::VectorXcd::Zero(mn);
    for (std::size_t j = 0; j < r1.reliable.size(); ++j) xq1[r1.reliable[j]] = r1.quantized[j];
    for (std::size_t j = 0; j < r2.reliable.size(); ++j) xq2[r2.reliable[j]] = r2.quantized[j];
    if (!r1.reliable.empty() || !r2.reliable.empty())
      y_k = cancel_interference(y_k, G, xq1, xq2, rho1, rho2);
    for (std::size_t j = 0; j < r1.reliable.size(); ++j) {
      res.x_hat1[r1.reliable[j]] = r1.quantized[j];
      det1[static_cast<std::size_t>(r1.reliable[j])] = 1;
    }
    for (std::size_t j = 0; j < r2.reliable.size(); ++j) {
      res.x_hat2[r2.reliable[j]] = r2.quantized[j];
      det2[static_cast<std::size_t>(r2.reliable[j])] = 1;
    }

    IterationDiagnostics diag;
    diag.T1 = T1;
    diag.T2 = T2;
    diag.new_reliable1 = static_cast<int>(r1.reliable.size());
    diag.new_reliable2 = static_cast<int>(r2.reliable.size());
    diag.gamma1 = tracker_ok ? tracker.gamma1() : std::numeric_limits<double>::quiet_NaN();
    diag.gamma2 = tracker_ok ? tracker.gamma2() : std::numeric_limits<double>::quiet_NaN();
    diag.solver_iterations = rep.iterations_used;
    res.diagnostics.push_back(diag);
    res.iterations_used = k;

    if (tracker_ok) {
      ProbTriple p1 = user_probs(1, T1, tracker.gamma1(), c1, ratio);
      ProbTriple p2 = user_probs(2, T2, tracker.gamma2(), c2, ratio);
      if (cfg.empirical_probabilities) {
        p1 = empirical_triple(p1, r1.reliable.size(), cand1.size());
        p2 = empirical_triple(p2, r2.reliable.size(), cand2.size());
      }
      advance(tracker, p1, p2);
    }

    const auto& own = cfg.user == 1 ? det1 : det2;
    bool done = true;
    for (auto v : own) done = done && v;
    if (done) break;
  }

  // Force decisions from the last equalizer output. A User 2 symbol whose User 1 partner was
  // not yet cancelled before that solve gets its partner subtracted at symbol level.
  for (std::size_t n = 0; n < n_sym; ++n) {
    const cplx v = x_sup[static_cast<Eigen::Index>(n)] / scale_last;
    if (cfg.user == 1) {
      if (!det1[n]) {
        res.x_hat1[static_cast<Eigen::Index>(n)] = quantize(v / sr1, c1);
        ++res.undetected_at_exit;
      }
    } else if (!det2[n]) {
      cplx residual = v;
      if (!gate_last[n]) {
        const cplx partner = det1[n] ? res.x_hat1[static_cast<Eigen::Index>(n)] : quantize(v / sr1, c1);
        residual -= sr1 * partner;
      }
      res.x_hat2[static_cast<Eigen::Index>(n)] = quantize(residual / sr2, c2);
      ++res.undetected_at_exit;
    }
  }
  res.x_hat_user = cfg.user == 1 ? res.x_hat1 : res.x_hat2;
  return res;
}

}  // namespace otfsnoma
