#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvsim/rng.hpp"
#include "cvsim/symplectic.hpp"

// One- and two-mode Gaussian gate symplectics (qqpp ordering).
//
// Quadrature actions, with c = cos, s = sin, ch = cosh, sh = sinh:
//   phase rotation   q -> c q + s p,  p -> -s q + c p
//   squeeze          q -> e^r q,      p -> e^-r p
//   beam splitter    q1 -> c q1 + s q2 (same for p), q2 -> -s q1 + c q2
//   two-mode squeeze q1 -> ch q1 + sh q2,  p1 -> ch p1 - sh p2  (1 <-> 2 sym.)
// The beam splitter is the quadrature action of exp(phi (a^dag b - a b^dag)),
// the two-mode squeeze of exp(r (a^dag b^dag - a b)), the one-mode squeeze of
// exp(r/2 (a^dag^2 - a^2)), and the phase rotation of exp(-i theta a^dag a);
// the Fock-space verifier uses exactly these generators.

namespace cvsim {

struct GateParams {
  double theta = 0.0;  // phase angle, sampled uniform on [0, 2*pi)
  double phi = 0.0;    // beam-splitter angle, sampled uniform on [0, 2*pi)
  double r = 0.0;      // squeezing parameter, sampled uniform on [0, 1]
};

namespace detail {
inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string("gate parameter ") + name + " is not finite");
  }
}
}  // namespace detail

inline SymplecticMatrix phase_rotation(double theta) {
  detail::require_finite(theta, "theta");
  Eigen::Matrix2d s;
  s << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return SymplecticMatrix::checked(s, 1e-12);
}

inline SymplecticMatrix one_mode_squeeze(double r) {
  detail::require_finite(r, "r");
  Eigen::Matrix2d s;
  s << std::exp(r), 0.0, 0.0, std::exp(-r);
  return SymplecticMatrix::checked(s, 1e-12);
}

inline SymplecticMatrix beam_splitter(double phi) {
  detail::require_finite(phi, "phi");
  const double c = std::cos(phi), sn = std::sin(phi);
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  // Same rotation on (q1, q2) and on (p1, p2).
  s(0, 0) = c;
  s(0, 1) = sn;
  s(1, 0) = -sn;
  s(1, 1) = c;
  s(2, 2) = c;
  s(2, 3) = sn;
  s(3, 2) = -sn;
  s(3, 3) = c;
  return SymplecticMatrix::checked(s, 1e-12);
}

inline SymplecticMatrix two_mode_squeeze(double r) {
  detail::require_finite(r, "r");
  const double ch = std::cosh(r), sh = std::sinh(r);
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 0) = ch;
  s(0, 1) = sh;
  s(1, 0) = sh;
  s(1, 1) = ch;
  s(2, 2) = ch;
  s(2, 3) = -sh;
  s(3, 2) = -sh;
  s(3, 3) = ch;
  return SymplecticMatrix::checked(s, 1e-12);
}

inline GateParams sample_gate_params(Rng& rng) {
  GateParams g;
  g.theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  g.phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  g.r = rng.uniform();
  return g;
}

}  // namespace cvsim
