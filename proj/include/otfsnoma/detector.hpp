// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "otfsnoma/grid.hpp"
#include "otfsnoma/linear_operator.hpp"
#include "otfsnoma/mlsqr.hpp"
#include "otfsnoma/thresholds.hpp"

namespace otfsnoma {

enum class ThresholdPolicy { Optimized, Naive };

struct DetectorConfig {
  int user = 1;  // receiver i
  int K = 10;
  ThresholdPolicy policy = ThresholdPolicy::Optimized;
  double naive_start_factor = 2.0;  // T^(1) scale in units of d
  ZoneRule zone_rule = ZoneRule::Or;
  MlsqrOptions solver;
  // divide equalized symbols by psi~ so they match the gamma~ = nu~^2/psi~^2 error model
  bool unbiased_scaling = true;
  bool refresh_gamma_from_solver = false;
  // tracker bookkeeping from measured reliable fractions instead of the analytic model
  bool empirical_probabilities = false;
  bool record_trace = false;

  void validate() const;
};

struct IterationDiagnostics {
  double T1 = 0.0;
  double T2 = 0.0;
  int new_reliable1 = 0;
  int new_reliable2 = 0;
  double gamma1 = 0.0;  // tracked values used to pick T1, T2
  double gamma2 = 0.0;
  int solver_iterations = 0;
};

// Index sets at the start of an iteration plus what the RZ detector accepted.
struct IterationTrace {
  std::vector<std::uint8_t> undetected1;  // N1
  std::vector<std::uint8_t> undetected2;  // N2
  std::vector<std::uint8_t> detected1;    // D1
  std::vector<int> reliable1;             // R1
  std::vector<int> reliable2;             // R2
};

struct DetectionResult {
  Eigen::VectorXcd x_hat_user;  // constellation points of user i
  Eigen::VectorXcd x_hat1;      // detected values, 0 where undetected before the exit step
  Eigen::VectorXcd x_hat2;
  int iterations_used = 0;
  int solver_calls = 0;
  int undetected_at_exit = 0;
  std::vector<IterationDiagnostics> diagnostics;
  std::vector<IterationTrace> trace;  // only with record_trace
};

struct RzPartition {
  std::vector<int> reliable;
  std::vector<cplx> quantized;  // aligned with reliable
};

RzPartition rz_partition(const Eigen::VectorXcd& x_tilde, const std::vector<int>& indices,
                         double T, const QamConstellation& c, ZoneRule rule = ZoneRule::And);

// y - G (sqrt(rho1) xq1 + sqrt(rho2) xq2)
Eigen::VectorXcd cancel_interference(const Eigen::VectorXcd& y_k, const LinearOperator<double>& G,
                                     const Eigen::VectorXcd& xq1, const Eigen::VectorXcd& xq2,
                                     double rho1, double rho2);

// start_factor d (1 - k/K)
double naive_threshold(int k, int K, double d, double start_factor = 2.0);

DetectionResult detect(const LinearOperator<double>& G, const Eigen::VectorXcd& g_first_col,
                       int M, int N, const Eigen::VectorXcd& y, double rho1, double rho2,
                       double sigma2, const DetectorConfig& cfg, const QamConstellation& c1,
                       const QamConstellation& c2);

}  // namespace otfsnoma
