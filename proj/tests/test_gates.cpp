#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cvsim/gates.hpp"
#include "cvsim/symplectic.hpp"
#include "support/generators.hpp"

using namespace cvsim;
using Catch::Matchers::WithinAbs;

TEST_CASE("phase rotation matrix") {
  REQUIRE((phase_rotation(0.0).matrix() - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  const Eigen::MatrixXd s = phase_rotation(std::numbers::pi / 2).matrix();
  Eigen::Matrix2d want;
  want << 0, 1, -1, 0;
  REQUIRE((s - want).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(symplectic_residual(phase_rotation(rng.uniform(-10, 10)).matrix()) <= 1e-12);
  }
}

TEST_CASE("phase rotations compose additively") {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    const Eigen::MatrixXd lhs = phase_rotation(a).matrix() * phase_rotation(b).matrix();
    REQUIRE((lhs - phase_rotation(a + b).matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("one-mode squeeze matrix") {
  REQUIRE((one_mode_squeeze(0.0).matrix() - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  const Eigen::MatrixXd s = one_mode_squeeze(1.0).matrix();
  REQUIRE_THAT(s(0, 0), WithinAbs(std::exp(1.0), 1e-14));
  REQUIRE_THAT(s(1, 1), WithinAbs(std::exp(-1.0), 1e-14));
  REQUIRE_THAT(s(0, 1), WithinAbs(0.0, 0.0));

  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const double r = rng.uniform(-2, 2);
    REQUIRE_THAT(one_mode_squeeze(r).matrix().determinant(), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("beam splitter matrix") {
  REQUIRE((beam_splitter(0.0).matrix() - Eigen::Matrix4d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);

  const Eigen::MatrixXd s45 = beam_splitter(std::numbers::pi / 4).matrix();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (s45(i, j) != 0.0) {
        REQUIRE_THAT(std::abs(s45(i, j)), WithinAbs(inv_sqrt2, 1e-14));
      }
    }
  }

  // Quarter rotation in mode space: q1 <-> q2 and p1 <-> p2 with a sign.
  const Eigen::MatrixXd s90 = beam_splitter(std::numbers::pi / 2).matrix();
  Eigen::Matrix4d want = Eigen::Matrix4d::Zero();
  want(0, 1) = 1;
  want(1, 0) = -1;
  want(2, 3) = 1;
  want(3, 2) = -1;
  REQUIRE((s90 - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-mode squeeze matrix") {
  REQUIRE((two_mode_squeeze(0.0).matrix() - Eigen::Matrix4d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  const double r = 0.7;
  const Eigen::MatrixXd s = two_mode_squeeze(r).matrix();
  // q1' = ch q1 + sh q2, p1' = ch p1 - sh p2.
  REQUIRE_THAT(s(0, 0), WithinAbs(std::cosh(r), 1e-14));
  REQUIRE_THAT(s(0, 1), WithinAbs(std::sinh(r), 1e-14));
  REQUIRE_THAT(s(2, 3), WithinAbs(-std::sinh(r), 1e-14));
  REQUIRE_THAT(s(0, 2), WithinAbs(0.0, 0.0));
}

TEST_CASE("all gate constructions satisfy S J S^T = J") {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    REQUIRE(symplectic_residual(phase_rotation(rng.uniform(-7, 7)).matrix()) <= 1e-12);
    REQUIRE(symplectic_residual(one_mode_squeeze(rng.uniform(-1.5, 1.5)).matrix()) <= 1e-12);
    REQUIRE(symplectic_residual(beam_splitter(rng.uniform(-7, 7)).matrix()) <= 1e-12);
    REQUIRE(symplectic_residual(two_mode_squeeze(rng.uniform(-1.5, 1.5)).matrix()) <= 1e-12);
  }
}

TEST_CASE("gates invert with negated parameters") {
  Rng rng(15);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-1.2, 1.2);
    REQUIRE((phase_rotation(x).matrix() * phase_rotation(-x).matrix() -
             Eigen::Matrix2d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    REQUIRE((one_mode_squeeze(x).matrix() * one_mode_squeeze(-x).matrix() -
             Eigen::Matrix2d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    REQUIRE((beam_splitter(x).matrix() * beam_splitter(-x).matrix() -
             Eigen::Matrix4d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    REQUIRE((two_mode_squeeze(x).matrix() * two_mode_squeeze(-x).matrix() -
             Eigen::Matrix4d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }
}

TEST_CASE("embed places a gate on selected modes") {
  const int three[] = {3};
  REQUIRE((embed(phase_rotation(0.0), three, 8).matrix() -
           Eigen::MatrixXd::Identity(16, 16))
              .cwiseAbs()
              .maxCoeff() == 0.0);

  const int pair[] = {2, 3};
  const SymplecticMatrix s = embed(beam_splitter(0.9), pair, 6);
  REQUIRE(symplectic_residual(s.matrix()) <= 1e-12);
  // Untouched modes stay identity rows.
  REQUIRE(s.matrix()(0, 0) == 1.0);
  REQUIRE(s.matrix().row(0).cwiseAbs().sum() == 1.0);

  REQUIRE_THROWS_AS(embed(beam_splitter(0.1), std::vector<int>{1, 1}, 4),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(embed(beam_splitter(0.1), std::vector<int>{1, 7}, 4),
                    std::invalid_argument);
}

TEST_CASE("non-symplectic matrices are rejected") {
  Eigen::Matrix2d bad;
  bad << 1, 0, 0, 2;
  REQUIRE_THROWS_AS(SymplecticMatrix::checked(bad), std::invalid_argument);
}

TEST_CASE("random symplectic products stay symplectic") {
  Rng rng(16);
  for (int i = 0; i < 20; ++i) {
    const SymplecticMatrix s = cvsim::testing::random_symplectic(rng, 4);
    REQUIRE(symplectic_residual(s.matrix()) < 1e-9);
  }
}
