// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "otfsnoma/detail/fft.hpp"
#include "otfsnoma/grid.hpp"
#include "otfsnoma/types.hpp"

namespace otfsnoma {

// s = (F_N^H kron A_cp) x. The CP repeats the last n_cp samples of every length-M OFDM symbol.
template <typename Derived>
CVector<typename Derived::RealScalar> otfs_modulate(const Eigen::MatrixBase<Derived>& x,
                                                    const FrameConfig& cfg) {
  using Real = typename Derived::RealScalar;
  const int M = cfg.M, N = cfg.N, L = cfg.M + cfg.n_cp;
  if (x.size() != static_cast<Eigen::Index>(M) * N)
    throw DimensionError("otfs_modulate: frame length " + std::to_string(x.size()) +
                         " != M*N = " + std::to_string(M * N));
  CVector<Real> grid = x;
  detail::doppler_dft_inplace<Real>(grid, M, N, true);
  CVector<Real> s(static_cast<Eigen::Index>(N) * L);
  for (int n = 0; n < N; ++n) {
    auto block = s.segment(static_cast<Eigen::Index>(n) * L, L);
    block.tail(M) = grid.segment(static_cast<Eigen::Index>(n) * M, M);
    block.head(cfg.n_cp) = grid.segment(static_cast<Eigen::Index>(n) * M + M - cfg.n_cp, cfg.n_cp);
  }
  return s;
}

// y = (F_N kron R_cp) r.
template <typename Derived>
CVector<typename Derived::RealScalar> otfs_demodulate(const Eigen::MatrixBase<Derived>& r,
                                                      const FrameConfig& cfg) {
  using Real = typename Derived::RealScalar;
  const int M = cfg.M, N = cfg.N, L = cfg.M + cfg.n_cp;
  if (r.size() != static_cast<Eigen::Index>(N) * L)
    throw DimensionError("otfs_demodulate: signal length " + std::to_string(r.size()) +
                         " != N*(M+n_cp) = " + std::to_string(N * L));
  CVector<Real> grid(static_cast<Eigen::Index>(M) * N);
  for (int n = 0; n < N; ++n)
    grid.segment(static_cast<Eigen::Index>(n) * M, M) =
        r.segment(static_cast<Eigen::Index>(n) * L + cfg.n_cp, M);
  detail::doppler_dft_inplace<Real>(grid, M, N, false);
  return grid;
}

// s = sqrt(rho1) s1 + sqrt(rho2) s2 with rho1 > rho2 > 0 and rho1 + rho2 = 1.
template <typename D1, typename D2>
CVector<typename D1::RealScalar> superimpose(const Eigen::MatrixBase<D1>& s1,
                                             const Eigen::MatrixBase<D2>& s2, double rho1,
                                             double rho2) {
  using Real = typename D1::RealScalar;
  if (std::abs(rho1 + rho2 - 1.0) > 1e-12 || !(rho2 > 0.0) || !(rho1 > rho2))
    throw std::invalid_argument("superimpose: need rho1 > rho2 > 0 and rho1 + rho2 = 1");
  if (s1.size() != s2.size()) throw DimensionError("superimpose: signal lengths differ");
  return static_cast<Real>(std::sqrt(rho1)) * s1 + static_cast<Real>(std::sqrt(rho2)) * s2;
}

// G = (F_N kron R_cp) H (F_N^H kron A_cp), built column by column through the FFT path.
template <typename Derived>
CMatrix<typename Derived::RealScalar> build_effective_channel(const Eigen::MatrixBase<Derived>& H,
                                                              const FrameConfig& cfg) {
  using Real = typename Derived::RealScalar;
  const Eigen::Index side = cfg.frame_len();
  if (H.rows() != side || H.cols() != side)
    throw DimensionError("build_effective_channel: H must be square of side N*(M+n_cp) = " +
                         std::to_string(side));
  const Eigen::Index mn = cfg.grid_size();
  CMatrix<Real> G(mn, mn);
  CVector<Real> e = CVector<Real>::Zero(mn);
  for (Eigen::Index j = 0; j < mn; ++j) {
    e.setZero();
    e[j] = Real(1);
    CVector<Real> s = otfs_modulate(e, cfg);
    CVector<Real> r = H * s;
    G.col(j) = otfs_demodulate(r, cfg);
  }
  return G;
}

}  // namespace otfsnoma
