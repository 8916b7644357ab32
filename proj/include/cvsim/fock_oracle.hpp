#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

// Dense truncated-number-basis simulation of up to 3 modes. This is the
// brute-force verifier for the covariance-matrix engine: same gate
// generators, no Gaussian structure assumed anywhere.
//
// Generators (matching the symplectic constructors in gates.hpp):
//   phase rotation    exp(-i theta a^dag a)        (diagonal, applied exactly)
//   one-mode squeeze  exp(r/2 (a^dag^2 - a^2))
//   beam splitter     exp(phi (a^dag b - a b^dag))
//   two-mode squeeze  exp(r (a^dag b^dag - a b))

namespace cvsim::fock {

enum class GateKind { PhaseRotation, Squeeze, BeamSplitter, TwoModeSqueeze };

struct GateOp {
  GateKind kind = GateKind::PhaseRotation;
  double param = 0.0;
  int mode_a = 0;
  int mode_b = 1;  // second mode for two-mode kinds
};

class FockState {
 public:
  FockState(int n_modes, int cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
    if (n_modes < 1 || n_modes > 3) {
      throw std::invalid_argument("FockState: 1 to 3 modes supported");
    }
    if (cutoff < 4) throw std::invalid_argument("FockState: cutoff must be >= 4");
    std::int64_t dim = 1;
    for (int m = 0; m < n_modes; ++m) {
      dim *= cutoff + 1;
      if (dim > 5'000'000) throw std::invalid_argument("FockState: truncated space too large");
    }
    amps_ = Eigen::VectorXcd::Zero(dim);
    // Per-mode occupation of every flat index, so the operator loops stay
    // free of integer divisions.
    occ_.assign(n_modes_, std::vector<std::uint16_t>(dim));
    for (std::int64_t i = 0; i < dim; ++i) {
      std::int64_t rest = i;
      for (int m = n_modes_ - 1; m >= 0; --m) {
        occ_[m][i] = static_cast<std::uint16_t>(rest % (cutoff + 1));
        rest /= cutoff + 1;
      }
    }
    sqrt_.resize(cutoff + 3);
    for (int n = 0; n < cutoff + 3; ++n) sqrt_[n] = std::sqrt(double(n));
  }

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  // mode 0 has the largest stride (slowest index).
  std::int64_t stride(int mode) const {
    std::int64_t s = 1;
    for (int m = n_modes_ - 1; m > mode; --m) s *= cutoff_ + 1;
    return s;
  }

  int occupation(int mode, std::int64_t index) const { return occ_[mode][index]; }
  double sqrt_of(int n) const { return sqrt_[n]; }

  double norm() const { return amps_.norm(); }
  void normalize() {
    const double n = norm();
    if (n < 1e-300) throw std::runtime_error("FockState: vanishing norm");
    amps_ /= n;
  }

 private:
  int n_modes_;
  int cutoff_;
  Eigen::VectorXcd amps_;
  std::vector<std::vector<std::uint16_t>> occ_;
  std::vector<double> sqrt_;
};

inline FockState oracle_vacuum(int n_modes, int cutoff) {
  FockState st(n_modes, cutoff);
  st.amplitudes()(0) = 1.0;
  return st;
}

// Total probability of finding `mode` at the top level of the truncation.
// A comparison only counts as converged when this is < 1e-10 for all modes.
inline double tail_weight(const FockState& st, int mode) {
  double w = 0.0;
  const auto& a = st.amplitudes();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (st.occupation(mode, i) == st.cutoff()) w += std::norm(a(i));
  }
  return w;
}

inline double max_tail_weight(const FockState& st) {
  double w = 0.0;
  for (int m = 0; m < st.n_modes(); ++m) w = std::max(w, tail_weight(st, m));
  return w;
}

namespace detail {

// out += scale * G in, with G the (anti-Hermitian) gate generator.
inline void add_generator_action(const FockState& st, const GateOp& op,
                                 const Eigen::VectorXcd& in, double scale,
                                 Eigen::VectorXcd& out) {
  const int d = st.cutoff() + 1;
  const std::int64_t n = in.size();
  switch (op.kind) {
    case GateKind::Squeeze: {
      const std::int64_t s = st.stride(op.mode_a);
      const double r = op.param * scale;
      for (std::int64_t i = 0; i < n; ++i) {
        const int na = st.occupation(op.mode_a, i);
        std::complex<double> acc = 0.0;
        if (na >= 2) acc += st.sqrt_of(na) * st.sqrt_of(na - 1) * in(i - 2 * s);
        if (na + 2 < d) acc -= st.sqrt_of(na + 1) * st.sqrt_of(na + 2) * in(i + 2 * s);
        out(i) += 0.5 * r * acc;
      }
      break;
    }
    case GateKind::BeamSplitter: {
      const std::int64_t sa = st.stride(op.mode_a), sb = st.stride(op.mode_b);
      const double phi = op.param * scale;
      for (std::int64_t i = 0; i < n; ++i) {
        const int na = st.occupation(op.mode_a, i);
        const int nb = st.occupation(op.mode_b, i);
        std::complex<double> acc = 0.0;
        if (na >= 1 && nb + 1 < d)
          acc += st.sqrt_of(na) * st.sqrt_of(nb + 1) * in(i - sa + sb);
        if (na + 1 < d && nb >= 1)
          acc -= st.sqrt_of(na + 1) * st.sqrt_of(nb) * in(i + sa - sb);
        out(i) += phi * acc;
      }
      break;
    }
    case GateKind::TwoModeSqueeze: {
      const std::int64_t sa = st.stride(op.mode_a), sb = st.stride(op.mode_b);
      const double r = op.param * scale;
      for (std::int64_t i = 0; i < n; ++i) {
        const int na = st.occupation(op.mode_a, i);
        const int nb = st.occupation(op.mode_b, i);
        std::complex<double> acc = 0.0;
        if (na >= 1 && nb >= 1) acc += st.sqrt_of(na) * st.sqrt_of(nb) * in(i - sa - sb);
        if (na + 1 < d && nb + 1 < d)
          acc -= st.sqrt_of(na + 1) * st.sqrt_of(nb + 1) * in(i + sa + sb);
        out(i) += r * acc;
      }
      break;
    }
    case GateKind::PhaseRotation:
      throw std::logic_error("phase rotation is applied exactly, not via the generator");
  }
}

inline double generator_norm_bound(const FockState& st, const GateOp& op) {
  const double c = st.cutoff() + 2.0;
  switch (op.kind) {
    case GateKind::Squeeze:
      return std::abs(op.param) * c;
    case GateKind::BeamSplitter:
    case GateKind::TwoModeSqueeze:
      return 2.0 * std::abs(op.param) * c;
    case GateKind::PhaseRotation:
      return 0.0;
  }
  return 0.0;
}

}  // namespace detail

// Unitary gate on the truncated space, exp(G) applied to the amplitude vector
// by scaling-and-squaring with a machine-precision Taylor series per substep.
// Unitary up to truncation; check tail_weight before trusting the result.
inline void oracle_apply_unitary_in_place(FockState& st, const GateOp& op) {
  if (op.mode_a < 0 || op.mode_a >= st.n_modes()) {
    throw std::invalid_argument("oracle_apply_unitary: mode out of range");
  }
  const bool two_mode =
      op.kind == GateKind::BeamSplitter || op.kind == GateKind::TwoModeSqueeze;
  if (two_mode) {
    if (op.mode_b < 0 || op.mode_b >= st.n_modes() || op.mode_b == op.mode_a) {
      throw std::invalid_argument("oracle_apply_unitary: invalid second mode");
    }
  }
  if (op.kind == GateKind::PhaseRotation) {
    auto& a = st.amplitudes();
    for (std::int64_t i = 0; i < a.size(); ++i) {
      a(i) *= std::exp(std::complex<double>(0.0, -op.param * st.occupation(op.mode_a, i)));
    }
    return;
  }

  GateOp reduced = op;
  if (op.kind == GateKind::BeamSplitter) {
    // exp(phi (a^dag b - a b^dag)) is exactly 2*pi-periodic in phi.
    reduced.param = std::remainder(op.param, 2.0 * std::numbers::pi);
  }

  const double bound = detail::generator_norm_bound(st, reduced);
  int squarings = 0;
  double scale = 1.0;
  while (bound * scale > 4.0 && squarings < 40) {
    scale *= 0.5;
    ++squarings;
  }
  const std::int64_t steps = std::int64_t(1) << squarings;
  Eigen::VectorXcd term(st.amplitudes().size());
  Eigen::VectorXcd next(st.amplitudes().size());
  for (std::int64_t step = 0; step < steps; ++step) {
    Eigen::VectorXcd acc = st.amplitudes();
    term = st.amplitudes();
    for (int k = 1; k <= 80; ++k) {
      next.setZero();
      detail::add_generator_action(st, reduced, term, scale / k, next);
      term.swap(next);
      acc += term;
      if (term.norm() <= 1e-18 * acc.norm()) break;
    }
    st.amplitudes() = acc;
  }
}

inline FockState oracle_apply_unitary(const FockState& st, const GateOp& op) {
  FockState out = st;
  oracle_apply_unitary_in_place(out, op);
  return out;
}

// Multiply the amplitude of level n on `mode` by e^{-beta n}, renormalize.
inline void oracle_imaginary_in_place(FockState& st, int mode, double beta) {
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw std::invalid_argument("oracle_imaginary: beta must be >= 0");
  }
  if (mode < 0 || mode >= st.n_modes()) {
    throw std::invalid_argument("oracle_imaginary: mode out of range");
  }
  auto& a = st.amplitudes();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    a(i) *= std::exp(-beta * st.occupation(mode, i));
  }
  st.normalize();
}

inline FockState oracle_imaginary(const FockState& st, int mode, double beta) {
  FockState out = st;
  oracle_imaginary_in_place(out, mode, beta);
  return out;
}

// Keep only the level-0 amplitudes of `mode`, renormalize.
inline void oracle_project_zero_in_place(FockState& st, int mode) {
  if (mode < 0 || mode >= st.n_modes()) {
    throw std::invalid_argument("oracle_project_zero: mode out of range");
  }
  auto& a = st.amplitudes();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (st.occupation(mode, i) != 0) a(i) = 0.0;
  }
  if (st.norm() < 1e-14) {
    throw std::runtime_error("oracle_project_zero: vanishing post-selection norm");
  }
  st.normalize();
}

inline FockState oracle_project_zero(const FockState& st, int mode) {
  FockState out = st;
  oracle_project_zero_in_place(out, mode);
  return out;
}

// Quadrature covariance M_ij = Re<X_i psi | X_j psi> - <X_i><X_j> computed
// from ladder-operator action, in the engine's qqpp ordering.
inline Eigen::MatrixXd covariance_of(const FockState& st) {
  const int l = st.n_modes();
  const int d = st.cutoff() + 1;
  const auto& a = st.amplitudes();
  const std::int64_t n = a.size();
  std::vector<Eigen::VectorXcd> xpsi(2 * l, Eigen::VectorXcd::Zero(n));
  for (int m = 0; m < l; ++m) {
    const std::int64_t s = st.stride(m);
    Eigen::VectorXcd lower = Eigen::VectorXcd::Zero(n);  // a psi
    Eigen::VectorXcd raise = Eigen::VectorXcd::Zero(n);  // a^dag psi
    for (std::int64_t i = 0; i < n; ++i) {
      const int na = st.occupation(m, i);
      if (na + 1 < d) lower(i) = st.sqrt_of(na + 1) * a(i + s);
      if (na >= 1) raise(i) = st.sqrt_of(na) * a(i - s);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    xpsi[m] = inv_sqrt2 * (lower + raise);                                  // q
    xpsi[l + m] = std::complex<double>(0.0, -inv_sqrt2) * (lower - raise);  // p
  }
  Eigen::VectorXd mean(2 * l);
  for (int i = 0; i < 2 * l; ++i) mean(i) = a.dot(xpsi[i]).real();
  Eigen::MatrixXd cov(2 * l, 2 * l);
  for (int i = 0; i < 2 * l; ++i) {
    for (int j = i; j < 2 * l; ++j) {
      cov(i, j) = xpsi[i].dot(xpsi[j]).real() - mean(i) * mean(j);
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

// Reduced density matrix of a set of modes.
inline Eigen::MatrixXcd reduced_density_matrix(const FockState& st,
                                               std::span<const int> region) {
  if (region.empty()) throw std::invalid_argument("reduced_density_matrix: empty region");
  const int d = st.cutoff() + 1;
  std::vector<bool> in_region(st.n_modes(), false);
  for (int m : region) {
    if (m < 0 || m >= st.n_modes() || in_region[m]) {
      throw std::invalid_argument("reduced_density_matrix: bad region");
    }
    in_region[m] = true;
  }
  std::int64_t dim_r = 1, dim_e = 1;
  for (int m = 0; m < st.n_modes(); ++m) (in_region[m] ? dim_r : dim_e) *= d;

  // Reshape amplitudes into a dim_r x dim_e matrix, region index slowest.
  Eigen::MatrixXcd psi(dim_r, dim_e);
  const auto& a = st.amplitudes();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    std::int64_t ir = 0, ie = 0;
    for (int m = 0; m < st.n_modes(); ++m) {
      const int nm = st.occupation(m, i);
      if (in_region[m]) {
        ir = ir * d + nm;
      } else {
        ie = ie * d + nm;
      }
    }
    psi(ir, ie) = a(i);
  }
  return psi * psi.adjoint();
}

// Renyi-2 entropy of a mode region from the reduced density matrix, in nats.
inline double oracle_renyi2(const FockState& st, std::span<const int> region) {
  const Eigen::MatrixXcd rho = reduced_density_matrix(st, region);
  return -std::log(rho.squaredNorm());  // tr(rho^2) = ||rho||_F^2
}

// General Renyi index via the spectrum of the reduced density matrix.
inline double oracle_renyi_alpha(const FockState& st, std::span<const int> region,
                                 double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw std::invalid_argument("oracle_renyi_alpha: alpha must be positive and != 1");
  }
  const Eigen::MatrixXcd rho = reduced_density_matrix(st, region);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  double sum = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 1e-300) sum += std::pow(lam, alpha);
  }
  return std::log(sum) / (1.0 - alpha);
}

}  // namespace cvsim::fock
