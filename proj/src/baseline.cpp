// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/baseline.hpp"

#include <cmath>
#include <string>

#include "otfsnoma/detail/fft.hpp"

namespace otfsnoma {

MmseContext mmse_matrix(const Eigen::MatrixXcd& G, double sigma2, int user, Eigen::Index cap) {
  if (G.rows() != G.cols()) throw DimensionError("mmse_matrix: G must be square");
  if (G.rows() > cap)
    throw std::length_error("mmse_matrix: MN = " + std::to_string(G.rows()) + " exceeds cap " +
                            std::to_string(cap));
  if (!(sigma2 > 0.0)) throw std::domain_error("mmse_matrix: sigma2 must be > 0");
  Eigen::MatrixXcd A = G.adjoint() * G;
  A.diagonal().array() += sigma2;
  MmseContext ctx;
  ctx.W = A.llt().solve(G.adjoint());
  ctx.user = user;
  ctx.sigma2 = sigma2;
  return ctx;
}

BlockMmseEqualizer::BlockMmseEqualizer(std::shared_ptr<const DelayTimeChannel> ch, double sigma2)
    : ch_(std::move(ch)) {
  if (!(sigma2 > 0.0)) throw std::domain_error("BlockMmseEqualizer: sigma2 must be > 0");
  const FrameConfig& cfg = ch_->frame();
  const int M = cfg.M, taps = ch_->taps();
  factors_.reserve(cfg.N);
  for (int b = 0; b < cfg.N; ++b) {
    // H_b^H H_b from the taps: row i couples columns (i - l) mod M and (i - l') mod M
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(M, M);
    for (int i = 0; i < M; ++i)
      for (int l = 0; l < taps; ++l) {
        const cplx hl = ch_->coefficient(l, b, i);
        if (hl == cplx(0.0)) continue;
        const int j = ((i - l) % M + M) % M;
        for (int lp = 0; lp < taps; ++lp) {
          const int jp = ((i - lp) % M + M) % M;
          gram(j, jp) += std::conj(hl) * ch_->coefficient(lp, b, i);
        }
      }
    gram.diagonal().array() += sigma2;
    factors_.emplace_back(gram);
  }
}

Eigen::VectorXcd BlockMmseEqualizer::equalize(const Eigen::VectorXcd& y) const {
  const FrameConfig& cfg = ch_->frame();
  const int M = cfg.M;
  Eigen::VectorXcd t = y;
  detail::doppler_dft_inplace<double>(t, M, cfg.N, true);
  Eigen::VectorXcd z = ch_->apply_blocks_adjoint(t);
  for (int b = 0; b < cfg.N; ++b) {
    auto seg = z.segment(static_cast<Eigen::Index>(b) * M, M);
    seg = factors_[static_cast<std::size_t>(b)].solve(Eigen::VectorXcd(seg));
  }
  detail::doppler_dft_inplace<double>(z, M, cfg.N, false);
  return z;
}

namespace {

Eigen::VectorXcd quantize_all(const Eigen::VectorXcd& v, const QamConstellation& c) {
  Eigen::VectorXcd q(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) q[n] = quantize(v[n], c);
  return q;
}

}  // namespace

Eigen::VectorXcd mmse_sic_detect(const Eigen::VectorXcd& y, const Equalizer& equalize,
                                 const LinearOperator<double>& G, int user, double rho1,
                                 double rho2, const QamConstellation& c1,
                                 const QamConstellation& c2) {
  if (user != 1 && user != 2) throw std::invalid_argument("mmse_sic_detect: user must be 1 or 2");
  const Eigen::VectorXcd x1 = quantize_all(equalize(y) / std::sqrt(rho1), c1);
  if (user == 1) return x1;
  const Eigen::VectorXcd y2 = y - std::sqrt(rho1) * G.apply(x1);
  return quantize_all(equalize(y2) / std::sqrt(rho2), c2);
}

Eigen::VectorXcd mmse_sic_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& G, int user,
                                 double rho1, double rho2, double sigma2,
                                 const QamConstellation& c1, const QamConstellation& c2) {
  const MmseContext ctx = mmse_matrix(G, sigma2, user);
  const Equalizer eq = [&ctx](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return ctx.W * v; };
  return mmse_sic_detect(y, eq, dense_operator(G), user, rho1, rho2, c1, c2);
}

}  // namespace otfsnoma
