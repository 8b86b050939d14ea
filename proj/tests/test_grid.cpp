// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "otfsnoma/grid.hpp"

using namespace otfsnoma;
using Catch::Approx;

TEST_CASE("constellation half distance gives unit energy") {
  const QamConstellation c4(4), c16(16);
  CHECK(c4.half_distance() == Approx(std::sqrt(0.5)));
  CHECK(c16.half_distance() == Approx(0.316227766).epsilon(1e-9));
  for (int A : {4, 16, 64, 256, 1024}) {
    const QamConstellation c(A);
    CHECK(c.points().size() == A);
    CHECK(c.points().squaredNorm() / A == Approx(1.0).epsilon(1e-12));
    CHECK(c.interferer_energy() == Approx(4 * c.half_distance() * c.half_distance()));
  }
  for (const auto& p : c4.points()) {
    CHECK(std::abs(std::abs(p.real()) - std::sqrt(0.5)) < 1e-15);
    CHECK(std::abs(std::abs(p.imag()) - std::sqrt(0.5)) < 1e-15);
  }
}

TEST_CASE("orders that are not even perfect squares are rejected") {
  CHECK_THROWS_AS(QamConstellation(8), std::invalid_argument);
  CHECK_THROWS_AS(QamConstellation(2), std::invalid_argument);
  CHECK_THROWS_AS(build_constellation(9), std::invalid_argument);
}

TEST_CASE("quantize picks the nearest point") {
  const QamConstellation c4(4), c16(16);
  const double d = std::sqrt(0.5);
  CHECK(std::abs(quantize({0.8, 0.6}, c4) - cplx(d, d)) < 1e-12);
  CHECK(std::abs(quantize({0.0, 0.0}, c4) - cplx(d, d)) < 1e-12);
  CHECK(std::abs(quantize({-0.9, 0.1}, c16) - cplx(-0.9486832981, 0.3162277660)) < 1e-9);

  // brute-force nearest neighbour away from ties
  for (double re = -1.33; re < 1.4; re += 0.0737)
    for (double im = -1.29; im < 1.4; im += 0.0811) {
      const cplx v(re, im);
      Eigen::Index best = 0;
      (c16.points().array() - v).abs().minCoeff(&best);
      CHECK(quantize(v, c16) == c16.points()[best]);
    }
}

TEST_CASE("unreliable zone under both membership rules") {
  const QamConstellation c4(4), c16(16);
  CHECK_FALSE(unreliable_zone_contains({0.65, 0.70}, 0.4, c4));
  CHECK_FALSE(unreliable_zone_contains({0.05, -0.9}, 0.4, c4, ZoneRule::And));
  CHECK(unreliable_zone_contains({0.05, -0.9}, 0.4, c4, ZoneRule::Or));
  CHECK(unreliable_zone_contains({0.60, 0.05}, 0.3, c16));
  CHECK_FALSE(unreliable_zone_contains({0.60, 0.05}, 0.0, c16, ZoneRule::Or));
}

TEST_CASE("strips at the full width tile the line") {
  const QamConstellation c16(16);
  const double d = c16.half_distance();
  for (double u = -2.99 * d; u <= 2.99 * d; u += 0.01) CHECK(c16.in_strip(u, 2 * d + 1e-12));
  // outermost boundaries are at +-2d, so coverage ends at +-3d
  CHECK_FALSE(c16.in_strip(6 * d, 0.5 * d));
  CHECK(c16.in_strip(2 * d + 0.2 * d, 0.5 * d));
}

TEST_CASE("frame validation") {
  FrameConfig f;
  CHECK_NOTHROW(f.validate());
  f.n_cp = f.M;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  f = FrameConfig{};
  f.N = 0;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  f = FrameConfig{};
  CHECK(f.t_s() == Approx(1.0 / (64 * 15e3)));
  CHECK(f.grid_size() == 1024);
}
