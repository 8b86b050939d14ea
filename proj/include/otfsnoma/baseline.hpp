// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "otfsnoma/channel.hpp"
#include "otfsnoma/grid.hpp"
#include "otfsnoma/linear_operator.hpp"

namespace otfsnoma {

struct MmseContext {
  Eigen::MatrixXcd W;  // (G^H G + sigma^2 I)^{-1} G^H
  int user = 1;
  double sigma2 = 0.0;
};

MmseContext mmse_matrix(const Eigen::MatrixXcd& G, double sigma2, int user = 1,
                        Eigen::Index cap = 4096);

// The same W applied through the delay-time block structure: one M x M Cholesky per OFDM
// symbol instead of one MN x MN solve.
class BlockMmseEqualizer {
 public:
  BlockMmseEqualizer(std::shared_ptr<const DelayTimeChannel> ch, double sigma2);

  Eigen::VectorXcd equalize(const Eigen::VectorXcd& y) const;

 private:
  std::shared_ptr<const DelayTimeChannel> ch_;
  std::vector<Eigen::LLT<Eigen::MatrixXcd>> factors_;
};

using Equalizer = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// Packet-level MMSE-SIC: User 1 treats User 2 as noise; User 2 cancels the quantized User 1
// frame and re-equalizes.
Eigen::VectorXcd mmse_sic_detect(const Eigen::VectorXcd& y, const Equalizer& equalize,
                                 const LinearOperator<double>& G, int user, double rho1,
                                 double rho2, const QamConstellation& c1,
                                 const QamConstellation& c2);

Eigen::VectorXcd mmse_sic_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& G, int user,
                                 double rho1, double rho2, double sigma2,
                                 const QamConstellation& c1, const QamConstellation& c2);

}  // namespace otfsnoma
