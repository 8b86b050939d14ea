// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otfsnoma {

void FrameConfig::validate() const {
  if (M < 1 || N < 1)
    throw ConfigError("frame: M and N must be >= 1 (got M=" + std::to_string(M) +
                      ", N=" + std::to_string(N) + ")");
  if (n_cp < 0 || n_cp >= M)
    throw ConfigError("frame: need 0 <= n_cp < M (got n_cp=" + std::to_string(n_cp) + ")");
  if (!(delta_f > 0.0) || !(f_c > 0.0))
    throw ConfigError("frame: delta_f and f_c must be positive");
}

QamConstellation::QamConstellation(int order) : order_(order) {
  side_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (order < 4 || side_ * side_ != order || side_ % 2 != 0)
    throw std::invalid_argument("QAM order must be an even perfect square >= 4, got " +
                                std::to_string(order));
  d_ = std::sqrt(3.0 / (2.0 * (order - 1)));
  levels_.resize(side_);
  for (int a = 0; a < side_; ++a) levels_[a] = (2 * a - side_ + 1) * d_;
  points_.resize(order);
  for (int i = 0; i < side_; ++i)
    for (int q = 0; q < side_; ++q) points_[i * side_ + q] = cplx(levels_[i], levels_[q]);
}

double QamConstellation::quantize_level(double u) const {
  // boundary u = 2ad maps to floor(a + side/2), i.e. the larger level
  double idx = std::floor(u / (2.0 * d_) + 0.5 * side_);
  int i = static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(side_ - 1)));
  return levels_[i];
}

bool QamConstellation::in_strip(double u, double T) const {
  if (T <= 0.0 || side_ < 2) return false;
  const int amax = side_ / 2 - 1;
  double a = std::round(u / (2.0 * d_));
  a = std::clamp(a, static_cast<double>(-amax), static_cast<double>(amax));
  return std::abs(u - 2.0 * a * d_) < 0.5 * T;
}

QamConstellation build_constellation(int order) { return QamConstellation(order); }

cplx quantize(cplx value, const QamConstellation& c) {
  return {c.quantize_level(value.real()), c.quantize_level(value.imag())};
}

bool unreliable_zone_contains(cplx value, double T, const QamConstellation& c, ZoneRule rule) {
  const bool re = c.in_strip(value.real(), T);
  const bool im = c.in_strip(value.imag(), T);
  return rule == ZoneRule::And ? (re && im) : (re || im);
}

}  // namespace otfsnoma
