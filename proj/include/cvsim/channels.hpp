#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvsim/gaussian_state.hpp"

// Non-unitary Gaussian channels. Displacements are never tracked: forced
// measurement outcomes shift displacements only, and the entropies computed
// here are displacement-independent.

namespace cvsim {

// Projection of a set of modes onto a Gaussian state with covariance sigma
// (1/2 I for coherent-state / vacuum projection).
struct MeasurementSpec {
  std::vector<int> modes;
  Eigen::MatrixXd sigma;

  static MeasurementSpec vacuum_projection(std::vector<int> modes) {
    MeasurementSpec spec;
    const int k = static_cast<int>(modes.size());
    spec.modes = std::move(modes);
    spec.sigma = 0.5 * Eigen::MatrixXd::Identity(2 * k, 2 * k);
    return spec;
  }
};

struct BetaGate {
  double beta = 0.0;  // measurement strength, >= 0
  int mode = 0;
};

// Conditional covariance after projecting modes B onto a Gaussian state with
// covariance sigma:  M_A' = M_AA - M_AB (M_BB + sigma)^{-1} M_BA.
// The outcome only affects the (untracked) displacement, so the update is
// outcome-independent. Measured modes are reset to vacuum and decoupled.
inline void gaussian_measure_in_place(GaussianState& state, const MeasurementSpec& spec) {
  if (spec.modes.empty()) {
    throw std::invalid_argument("gaussian_measure: empty measurement set");
  }
  const int k = static_cast<int>(spec.modes.size());
  if (spec.sigma.rows() != 2 * k || spec.sigma.cols() != 2 * k) {
    throw std::invalid_argument("gaussian_measure: sigma must be 2k x 2k");
  }
  if ((spec.sigma - spec.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("gaussian_measure: sigma not symmetric");
  }
  {
    const WilliamsonSpectrum s = williamson_eigenvalues(spec.sigma);
    for (double nu : s.nu) {
      if (nu < 0.5 - kUncertaintyTol) {
        throw std::invalid_argument("gaussian_measure: sigma is not a valid covariance");
      }
    }
  }
  detail::check_mode_indices(spec.modes, state.modes());

  Eigen::MatrixXd& m = state.mutable_covariance();
  const int n = static_cast<int>(m.rows());
  const std::vector<int> idx = detail::quadrature_indices(spec.modes, state.modes());
  const int d = 2 * k;

  Eigen::MatrixXd cross(n, d);
  for (int a = 0; a < d; ++a) cross.col(a) = m.col(idx[a]);
  Eigen::MatrixXd mbb(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) mbb(a, b) = m(idx[a], idx[b]);

  Eigen::LDLT<Eigen::MatrixXd> solver(mbb + spec.sigma);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gaussian_measure: M_BB + sigma not factorizable");
  }
  const Eigen::MatrixXd gain = solver.solve(cross.transpose()).transpose();  // n x d
  m.noalias() -= gain * cross.transpose();

  // Reset measured modes to vacuum, decoupled from everything.
  for (int a = 0; a < d; ++a) {
    m.row(idx[a]).setZero();
    m.col(idx[a]).setZero();
    m(idx[a], idx[a]) = 0.5;
  }
  state.resymmetrize();
}

inline GaussianState gaussian_measure(const GaussianState& state, const MeasurementSpec& spec) {
  GaussianState out = state;
  gaussian_measure_in_place(out, spec);
  return out;
}

inline void project_vacuum_in_place(GaussianState& state, int mode) {
  gaussian_measure_in_place(state, MeasurementSpec::vacuum_projection({mode}));
}

inline GaussianState project_vacuum(const GaussianState& state, int mode) {
  GaussianState out = state;
  project_vacuum_in_place(out, mode);
  return out;
}

// Covariance of the normalized state e^{-beta n} |psi> / ||.|| on one mode.
//
// Derivation (Husimi Q picture): the Q function of a Gaussian state has
// covariance Gamma = M + 1/2 I, and e^{-beta n} acts on coherent states as
// |alpha> -> exp(-|alpha|^2 (1 - e^{-2 beta}) / 2) |e^{-beta} alpha>. The Q
// precision P = Gamma^{-1} therefore maps to D P D + (1 - e^{-2 beta}) Pi_j,
// with D scaling the measured mode's quadratures by e^{-beta} and Pi_j the
// projector onto them. Inverting via Woodbury gives a rank-2 update on Gamma
// with only decaying exponentials; with kappa = 1/(e^{2 beta} - 1) and
// W = (kappa I + Gamma_jj)^{-1}:
//   Gamma'_AA = Gamma_AA - Gamma_Aj W Gamma_jA
//   Gamma'_Aj = Gamma_Aj W / (2 sinh beta)
//   Gamma'_jj = Gamma_jj W / (1 - e^{-2 beta})
// Interpolates identity (beta = 0) to vacuum projection (beta -> inf); pure
// states stay pure. Verified against the Fock-space path in the tests.
inline void imaginary_time_number_in_place(GaussianState& state, const BetaGate& gate) {
  if (gate.beta < 0.0 || !std::isfinite(gate.beta)) {
    throw std::invalid_argument("imaginary_time_number: beta must be >= 0");
  }
  if (gate.mode < 0 || gate.mode >= state.modes()) {
    throw std::invalid_argument("imaginary_time_number: mode out of range");
  }
  if (gate.beta == 0.0) return;

  const double kappa = 1.0 / std::expm1(2.0 * gate.beta);        // -> 0 for large beta
  const double sinh_b = std::sinh(gate.beta);
  const double inv_2sinh = std::isinf(sinh_b) ? 0.0 : 1.0 / (2.0 * sinh_b);
  const double one_minus = -std::expm1(-2.0 * gate.beta);        // 1 - e^{-2 beta}

  Eigen::MatrixXd& m = state.mutable_covariance();
  const int n = static_cast<int>(m.rows());
  const int jq = gate.mode;
  const int jp = state.modes() + gate.mode;

  Eigen::MatrixXd gcol(n, 2);  // Gamma_{:,j}
  gcol.col(0) = m.col(jq);
  gcol.col(1) = m.col(jp);
  gcol(jq, 0) += 0.5;
  gcol(jp, 1) += 0.5;

  Eigen::Matrix2d gamma_jj;
  gamma_jj << gcol(jq, 0), gcol(jq, 1), gcol(jp, 0), gcol(jp, 1);
  const Eigen::Matrix2d w =
      (kappa * Eigen::Matrix2d::Identity() + gamma_jj).inverse();

  const Eigen::MatrixXd t = gcol * w;  // n x 2
  m.noalias() -= t * gcol.transpose();

  // Cross block and measured-mode block carry the extra scalings.
  for (int a = 0; a < n; ++a) {
    if (a == jq || a == jp) continue;
    m(a, jq) = t(a, 0) * inv_2sinh;
    m(a, jp) = t(a, 1) * inv_2sinh;
    m(jq, a) = m(a, jq);
    m(jp, a) = m(a, jp);
  }
  const Eigen::Matrix2d jj =
      gamma_jj * w / one_minus - 0.5 * Eigen::Matrix2d::Identity();
  m(jq, jq) = jj(0, 0);
  m(jq, jp) = 0.5 * (jj(0, 1) + jj(1, 0));
  m(jp, jq) = m(jq, jp);
  m(jp, jp) = jj(1, 1);
  state.resymmetrize();
}

inline GaussianState imaginary_time_number(const GaussianState& state, const BetaGate& gate) {
  GaussianState out = state;
  imaginary_time_number_in_place(out, gate);
  return out;
}

}  // namespace cvsim
