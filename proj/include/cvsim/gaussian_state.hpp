#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvsim/symplectic.hpp"

namespace cvsim {

inline constexpr double kCovSymmetryTol = 1e-10;
inline constexpr double kUncertaintyTol = 1e-8;

struct WilliamsonSpectrum {
  std::vector<double> nu;  // sorted descending; nu_i >= 1/2 for valid states
};

struct EntropyResult {
  double alpha = 2.0;
  double value = 0.0;  // nats
};

struct StateDiagnostics {
  double symmetry_residual = 0.0;   // max |M - M^T|
  double min_nu_minus_half = 0.0;   // min_i nu_i - 1/2
  double purity_defect = 0.0;       // |det(2M) - 1|
  bool symmetric = true;            // within kCovSymmetryTol
  bool uncertainty_ok = true;       // min nu >= 1/2 - kUncertaintyTol
  bool pure = true;                 // purity_defect < 1e-6
};

// L-mode Gaussian state with zero displacement, represented by its 2L x 2L
// covariance matrix in qqpp ordering. Plain value type; all operations are
// pure functions (in-place variants exist for the circuit hot path).
class GaussianState {
 public:
  static GaussianState vacuum(int modes) {
    if (modes < 1) throw std::invalid_argument("GaussianState: mode count must be >= 1");
    return GaussianState(modes,
                         0.5 * Eigen::MatrixXd::Identity(2 * modes, 2 * modes));
  }

  static GaussianState from_covariance(int modes, Eigen::MatrixXd cov) {
    if (modes < 1) throw std::invalid_argument("GaussianState: mode count must be >= 1");
    if (cov.rows() != 2 * modes || cov.cols() != 2 * modes) {
      throw std::invalid_argument("GaussianState: covariance must be 2L x 2L");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
      throw std::invalid_argument("GaussianState: covariance not symmetric");
    }
    GaussianState st(modes, std::move(cov));
    st.resymmetrize();
    return st;
  }

  int modes() const { return modes_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  Eigen::MatrixXd& mutable_covariance() { return cov_; }

  // M <- (M + M^T)/2; bounds drift from repeated updates.
  void resymmetrize() { cov_ = 0.5 * (cov_ + cov_.transpose()).eval(); }

  // M -> (E S E^T) M (E S E^T)^T with E the embedding of the k-mode gate into
  // the full index set. Only the touched rows/columns are rewritten.
  void apply_symplectic_in_place(const SymplecticMatrix& s, std::span<const int> modes) {
    const int k = s.modes();
    if (static_cast<int>(modes.size()) != k) {
      throw std::invalid_argument("apply_symplectic: gate/mode-count mismatch");
    }
    detail::check_mode_indices(modes, modes_);
    const std::vector<int> idx = detail::quadrature_indices(modes, modes_);
    const int n = 2 * modes_;
    const int d = 2 * k;
    Eigen::MatrixXd rows(d, n);
    for (int a = 0; a < d; ++a) rows.row(a) = cov_.row(idx[a]);
    rows = s.matrix() * rows;
    for (int a = 0; a < d; ++a) cov_.row(idx[a]) = rows.row(a);
    Eigen::MatrixXd cols(n, d);
    for (int a = 0; a < d; ++a) cols.col(a) = cov_.col(idx[a]);
    cols = cols * s.matrix().transpose();
    for (int a = 0; a < d; ++a) cov_.col(idx[a]) = cols.col(a);
    resymmetrize();
  }

  // Sub-covariance of a set of modes (qqpp-consistent index selection).
  Eigen::MatrixXd region_covariance(std::span<const int> region) const {
    if (region.empty()) throw std::invalid_argument("region must be nonempty");
    detail::check_mode_indices(region, modes_);
    const std::vector<int> idx = detail::quadrature_indices(region, modes_);
    const int d = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) sub(a, b) = cov_(idx[a], idx[b]);
    return sub;
  }

  // Row-major CSV dump with 17 significant digits, for external cross-checks.
  void write_covariance_csv(std::ostream& os) const {
    char buf[64];
    for (int i = 0; i < cov_.rows(); ++i) {
      for (int j = 0; j < cov_.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", cov_(i, j));
        os << buf << (j + 1 < cov_.cols() ? "," : "");
      }
      os << "\n";
    }
  }

 private:
  GaussianState(int modes, Eigen::MatrixXd cov) : modes_(modes), cov_(std::move(cov)) {}
  int modes_;
  Eigen::MatrixXd cov_;
};

inline GaussianState vacuum_state(int modes) { return GaussianState::vacuum(modes); }

inline GaussianState apply_symplectic(const GaussianState& state, const SymplecticMatrix& s,
                                      std::span<const int> modes) {
  GaussianState out = state;
  out.apply_symplectic_in_place(s, modes);
  return out;
}

// Williamson eigenvalues of a symmetric positive definite 2k x 2k covariance
// block: the k moduli of the eigenvalues of iJM, each returned once, sorted
// descending. Computed from the symmetric matrix -K^2 with K = M^{1/2} J
// M^{1/2} (K is antisymmetric, so -K^2 is PSD with doubly degenerate spectrum
// {nu_i^2}).
inline WilliamsonSpectrum williamson_eigenvalues(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0) {
    throw std::invalid_argument("williamson_eigenvalues: need a 2k x 2k matrix");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("williamson_eigenvalues: matrix not symmetric");
  }
  const int k = static_cast<int>(cov.rows()) / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("williamson_eigenvalues: eigensolver failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("williamson_eigenvalues: matrix not positive definite");
  }
  const Eigen::MatrixXd sqrt_m =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();
  Eigen::MatrixXd kmat = sqrt_m * symplectic_form(k) * sqrt_m;
  kmat = 0.5 * (kmat - kmat.transpose()).eval();
  Eigen::MatrixXd k2 = kmat.transpose() * kmat;
  k2 = 0.5 * (k2 + k2.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(k2);
  if (es2.info() != Eigen::Success) {
    throw std::runtime_error("williamson_eigenvalues: eigensolver failed");
  }
  // Ascending, doubly degenerate; average each pair from the top.
  WilliamsonSpectrum spec;
  spec.nu.resize(k);
  const auto& vals = es2.eigenvalues();
  for (int i = 0; i < k; ++i) {
    const double pair_mean = 0.5 * (vals(2 * k - 1 - 2 * i) + vals(2 * k - 2 - 2 * i));
    spec.nu[i] = std::sqrt(std::max(pair_mean, 0.0));
  }
  return spec;
}

inline WilliamsonSpectrum williamson_eigenvalues(const GaussianState& state) {
  return williamson_eigenvalues(state.covariance());
}

namespace detail {

// ln[(nu + 1/2)^a - (nu - 1/2)^a] without overflow for large nu.
inline double renyi_term(double nu, double alpha) {
  // Rounding can land nu slightly off 1/2 for pure modes; snap inside the
  // tolerance band so (nu - 1/2)^alpha stays real, and so alpha < 1 (whose
  // entropy has a square-root cusp at purity) does not amplify roundoff.
  if (nu < 0.5) {
    if (nu >= 0.5 - kUncertaintyTol) {
      nu = 0.5;
    } else {
      throw std::domain_error("renyi_entropy: Williamson eigenvalue below 1/2");
    }
  } else if (nu < 0.5 + 1e-10) {
    nu = 0.5;
  }
  if (nu == 0.5) return 0.0;
  const double log_big = std::log(nu + 0.5);
  const double ratio_log = std::log(nu - 0.5) - log_big;  // < 0
  return alpha * log_big + std::log1p(-std::exp(alpha * ratio_log));
}

// ln det(2 M) for SPD M via Cholesky.
inline double log_det_2m(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("log_det_2m: covariance not positive definite");
  }
  double log_det = static_cast<double>(cov.rows()) * std::numbers::ln2;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < cov.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  return log_det;
}

}  // namespace detail

// Renyi entropy S_alpha of a mode region, in nats:
//   S_alpha = sum_i ln[(nu_i + 1/2)^alpha - (nu_i - 1/2)^alpha] / (alpha - 1).
// alpha = 2 uses the fast path S_2 = (1/2) ln det(2 M_region); the two routes
// agree to 1e-9 (covered by tests).
inline EntropyResult renyi_entropy(const GaussianState& state, std::span<const int> region,
                                   double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw std::invalid_argument("renyi_entropy: alpha must be positive and != 1");
  }
  const Eigen::MatrixXd sub = state.region_covariance(region);
  EntropyResult res;
  res.alpha = alpha;
  if (alpha == 2.0) {
    res.value = 0.5 * detail::log_det_2m(sub);
    return res;
  }
  const WilliamsonSpectrum spec = williamson_eigenvalues(sub);
  double sum = 0.0;
  for (double nu : spec.nu) sum += detail::renyi_term(nu, alpha);
  res.value = sum / (alpha - 1.0);
  return res;
}

// alpha = 2 through the Williamson spectrum; exists so the determinant fast
// path has an independent in-library cross-check.
inline EntropyResult renyi2_via_spectrum(const GaussianState& state,
                                         std::span<const int> region) {
  const WilliamsonSpectrum spec = williamson_eigenvalues(state.region_covariance(region));
  double sum = 0.0;
  for (double nu : spec.nu) sum += detail::renyi_term(nu, 2.0);
  return EntropyResult{2.0, sum};
}

// Pure diagnostic: never throws, flags violations instead.
inline StateDiagnostics validate_state(const GaussianState& state) {
  StateDiagnostics d;
  const Eigen::MatrixXd& m = state.covariance();
  d.symmetry_residual = (m - m.transpose()).cwiseAbs().maxCoeff();
  d.symmetric = d.symmetry_residual <= kCovSymmetryTol;
  try {
    const WilliamsonSpectrum spec = williamson_eigenvalues(0.5 * (m + m.transpose()));
    double min_nu = spec.nu.front();
    double log_det = 0.0;
    for (double nu : spec.nu) {
      min_nu = std::min(min_nu, nu);
      log_det += 2.0 * std::log(2.0 * nu);
    }
    d.min_nu_minus_half = min_nu - 0.5;
    d.uncertainty_ok = min_nu >= 0.5 - kUncertaintyTol;
    d.purity_defect = std::abs(log_det) > 700.0 ? std::numeric_limits<double>::infinity()
                                                : std::abs(std::expm1(log_det));
  } catch (const std::exception&) {
    d.min_nu_minus_half = -std::numeric_limits<double>::infinity();
    d.uncertainty_ok = false;
    d.purity_defect = std::numeric_limits<double>::infinity();
  }
  d.pure = d.purity_defect < 1e-6;
  return d;
}

}  // namespace cvsim
