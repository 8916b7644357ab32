#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Conventions used throughout:
//   - L modes, quadratures ordered X = [q_1..q_L, p_1..p_L] ("qqpp"), hbar = 1.
//   - [X_i, X_j] = i J_ij with J = [[0, I_L], [-I_L, 0]].
//   - A Gaussian unitary acts on covariances as M -> S M S^T with S J S^T = J.

namespace cvsim {

inline constexpr double kSymplecticTol = 1e-10;

// J for `modes` modes in qqpp ordering.
inline Eigen::MatrixXd symplectic_form(int modes) {
  const int n = 2 * modes;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  j.topRightCorner(modes, modes) = Eigen::MatrixXd::Identity(modes, modes);
  j.bottomLeftCorner(modes, modes) = -Eigen::MatrixXd::Identity(modes, modes);
  return j;
}

// max |S J S^T - J|.
inline double symplectic_residual(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) {
    throw std::invalid_argument("symplectic_residual: matrix must be 2k x 2k");
  }
  const Eigen::MatrixXd j = symplectic_form(static_cast<int>(s.rows()) / 2);
  return (s * j * s.transpose() - j).cwiseAbs().maxCoeff();
}

// Real 2k x 2k matrix known to satisfy S J S^T = J. Constructed through
// checked() so everything downstream can rely on the invariant.
class SymplecticMatrix {
 public:
  static SymplecticMatrix checked(Eigen::MatrixXd s, double tol = kSymplecticTol) {
    const double res = symplectic_residual(s);
    if (!(res <= tol)) {
      throw std::invalid_argument("SymplecticMatrix: S J S^T - J residual " +
                                  std::to_string(res) + " exceeds tolerance");
    }
    return SymplecticMatrix(std::move(s));
  }

  int modes() const { return static_cast<int>(mat_.rows()) / 2; }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  explicit SymplecticMatrix(Eigen::MatrixXd s) : mat_(std::move(s)) {}
  Eigen::MatrixXd mat_;
};

namespace detail {

inline void check_mode_indices(std::span<const int> modes, int total_modes) {
  for (std::size_t a = 0; a < modes.size(); ++a) {
    if (modes[a] < 0 || modes[a] >= total_modes) {
      throw std::invalid_argument("mode index " + std::to_string(modes[a]) +
                                  " out of range for " + std::to_string(total_modes) +
                                  " modes");
    }
    for (std::size_t b = a + 1; b < modes.size(); ++b) {
      if (modes[a] == modes[b]) {
        throw std::invalid_argument("repeated mode index " + std::to_string(modes[a]));
      }
    }
  }
}

// Global row/column indices touched by a k-mode object on `modes`, in the
// local qqpp order [q_m0..q_mk, p_m0..p_mk].
inline std::vector<int> quadrature_indices(std::span<const int> modes, int total_modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) idx.push_back(m);
  for (int m : modes) idx.push_back(total_modes + m);
  return idx;
}

}  // namespace detail

// Identity outside the selected modes, `local` inside.
inline SymplecticMatrix embed(const SymplecticMatrix& local, std::span<const int> modes,
                              int total_modes) {
  const int k = local.modes();
  if (static_cast<int>(modes.size()) != k) {
    throw std::invalid_argument("embed: gate acts on " + std::to_string(k) +
                                " modes but " + std::to_string(modes.size()) +
                                " indices given");
  }
  detail::check_mode_indices(modes, total_modes);
  const std::vector<int> idx = detail::quadrature_indices(modes, total_modes);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * total_modes, 2 * total_modes);
  for (int a = 0; a < 2 * k; ++a) {
    for (int b = 0; b < 2 * k; ++b) {
      s(idx[a], idx[b]) = local.matrix()(a, b);
    }
  }
  return SymplecticMatrix::checked(std::move(s));
}

}  // namespace cvsim
