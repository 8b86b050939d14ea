// SPDX-License-Identifier: Apache-2.0
// Reference computations that share no code path with the library implementations they check.
#pragma once

#include <functional>

#include <Eigen/Dense>

#include "otfsnoma/grid.hpp"
#include "otfsnoma/types.hpp"

namespace otfsnoma::oracle {

// Unitary DFT matrix, F(k, n) = exp(-j 2 pi k n / N) / sqrt(N).
Eigen::MatrixXcd dft_matrix(int N);

// Explicit (F_N^H kron A_cp) and (F_N kron R_cp).
Eigen::MatrixXcd modulation_matrix(const FrameConfig& cfg);
Eigen::MatrixXcd demodulation_matrix(const FrameConfig& cfg);

// (G^H G + sigma2 I)^{-1} G^H y by complete orthogonal decomposition.
Eigen::VectorXcd ridge_solve(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y, double sigma2);

// U-step LSQR iterate as the Galerkin solution on the Krylov space K_U(A, G^H y),
// A = G^H G + sigma2 I, built by Arnoldi with full reorthogonalization.
Eigen::VectorXcd krylov_iterate(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y,
                                double sigma2, int U);

// The matrix polynomial L = p(A) with x_U = p(A) G^H y, read off in the eigenbasis of A.
Eigen::MatrixXcd krylov_equalizer(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& y,
                                  double sigma2, int U);

struct MseDecomposition {
  Eigen::VectorXd psi, nu2, gamma;
};

// x~ = L G^H (G x + w): useful gain, residual interference plus filtered noise per symbol.
MseDecomposition mse_decomposition(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& G,
                                   double sigma2);

// Explicit BCCB matrix of an M x N grid with the given first column.
Eigen::MatrixXcd bccb_from_first_column(const Eigen::VectorXcd& col, int M, int N);

struct PamFrequencies {
  double p_correct = 0.0;  // reliable and on the transmitted level
  double p_error = 0.0;    // reliable and on a neighbouring level
  long long draws = 0;
};

// Monte Carlo of one real dimension of the RZ decision:
// u = a1 + r a2 + N(0, gamma/2) for User 1 (a2 from User 1's levels), u = a + N(0, gamma/2)
// for User 2. Undetected when u falls in a strip of width T centred on a decision boundary.
PamFrequencies simulate_pam_decision(int user, double T, double gamma, const QamConstellation& c,
                                     double rho_ratio, long long draws, Rng& rng);

// argmin over an (n+1)-point uniform grid on [lo, hi]; ties go to the smaller abscissa.
double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int n);

}  // namespace otfsnoma::oracle
