// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "otfsnoma/types.hpp"

namespace otfsnoma {

// OTFS frame geometry. Delay-Doppler vectors are column-major M x N (delay index fastest).
struct FrameConfig {
  int M = 64;
  int N = 16;
  int n_cp = 0;
  double delta_f = 15e3;  // Hz
  double f_c = 5.9e9;     // Hz

  double t_s() const { return 1.0 / (M * delta_f); }
  int frame_len() const { return N * (M + n_cp); }
  int grid_size() const { return M * N; }

  // Throws ConfigError.
  void validate() const;
};

// Unit-energy square QAM.
class QamConstellation {
 public:
  QamConstellation() : QamConstellation(4) {}
  explicit QamConstellation(int order);

  int order() const { return order_; }
  int side() const { return side_; }  // sqrt(A)
  double half_distance() const { return d_; }
  const Eigen::VectorXcd& points() const { return points_; }
  const Eigen::VectorXd& pam_levels() const { return levels_; }

  // Energy of an interfering symbol error (distance to nearest neighbour squared).
  double interferer_energy() const { return 4.0 * d_ * d_; }

  // Nearest PAM level, ties toward the larger level.
  double quantize_level(double u) const;

  // True when u is inside one of the strips (2a d - T/2, 2a d + T/2).
  bool in_strip(double u, double T) const;

 private:
  int order_;
  int side_;
  double d_;
  Eigen::VectorXcd points_;
  Eigen::VectorXd levels_;
};

QamConstellation build_constellation(int order);

// Nearest constellation point; ties toward larger real part, then larger imaginary part.
cplx quantize(cplx value, const QamConstellation& c);

// And: both coordinates must sit in a strip. Or: either coordinate suffices.
enum class ZoneRule { And, Or };

bool unreliable_zone_contains(cplx value, double T, const QamConstellation& c,
                              ZoneRule rule = ZoneRule::And);

}  // namespace otfsnoma
