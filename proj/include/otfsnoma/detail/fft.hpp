// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include <unsupported/Eigen/FFT>

#include "otfsnoma/types.hpp"

namespace otfsnoma::detail {

// kissfft caches plans per size; one engine per thread keeps callers re-entrant.
template <typename Real>
Eigen::FFT<Real>& fft_engine() {
  thread_local Eigen::FFT<Real> engine = [] {
    Eigen::FFT<Real> e;
    e.SetFlag(Eigen::FFT<Real>::Unscaled);
    return e;
  }();
  return engine;
}

// Unitary DFT along the Doppler axis of a column-major M x N grid, for every delay row.
// inverse = false applies F_N, inverse = true applies F_N^H.
template <typename Real>
void doppler_dft_inplace(CVector<Real>& grid, int M, int N, bool inverse) {
  if (N == 1) return;
  auto& fft = fft_engine<Real>();
  const Real scale = Real(1) / std::sqrt(Real(N));
  CVector<Real> row(N), out(N);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) row[n] = grid[m + M * n];
    if (inverse)
      fft.inv(out, row);
    else
      fft.fwd(out, row);
    for (int n = 0; n < N; ++n) grid[m + M * n] = out[n] * scale;
  }
}

// Unnormalized forward 2D DFT of a column-major M x N grid.
template <typename Real>
CVector<Real> dft2_unnormalized(const CVector<Real>& grid, int M, int N) {
  auto& fft = fft_engine<Real>();
  CVector<Real> out = grid;
  CVector<Real> col(M), tmp(M);
  // kissfft does not handle length-1 transforms, which are the identity anyway
  for (int n = 0; M > 1 && n < N; ++n) {
    col = grid.segment(static_cast<Eigen::Index>(M) * n, M);
    fft.fwd(tmp, col);
    out.segment(static_cast<Eigen::Index>(M) * n, M) = tmp;
  }
  CVector<Real> row(N), rtmp(N);
  for (int m = 0; N > 1 && m < M; ++m) {
    for (int n = 0; n < N; ++n) row[n] = out[m + M * n];
    fft.fwd(rtmp, row);
    for (int n = 0; n < N; ++n) out[m + M * n] = rtmp[n];
  }
  return out;
}

}  // namespace otfsnoma::detail
