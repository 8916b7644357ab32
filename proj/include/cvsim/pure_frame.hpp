#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "cvsim/gaussian_state.hpp"

namespace cvsim {

// Pure Gaussian state tracked through its symplectic frame: M = 1/2 S S^T
// with S the accumulated circuit symplectic. Purely unitary trajectories keep
// exact purity in this form, and subsystem entropies stay computable long
// after the covariance matrix itself becomes too ill-conditioned for a
// log-determinant (its condition number grows exponentially with depth, the
// frame's only like its square root).
class PureFrame {
 public:
  explicit PureFrame(int modes)
      : modes_(modes), s_(Eigen::MatrixXd::Identity(2 * modes, 2 * modes)) {
    if (modes < 1) throw std::invalid_argument("PureFrame: mode count must be >= 1");
  }

  int modes() const { return modes_; }
  const Eigen::MatrixXd& frame() const { return s_; }

  // S <- G S for a one-mode gate G acting on `mode`.
  void apply_one_mode(const Eigen::Matrix2d& g, int mode) {
    const int q = mode, p = modes_ + mode;
    Eigen::RowVectorXd row_q = g(0, 0) * s_.row(q) + g(0, 1) * s_.row(p);
    s_.row(p) = g(1, 0) * s_.row(q) + g(1, 1) * s_.row(p);
    s_.row(q) = row_q;
  }

  // Beam splitter on modes (i, j): the same 2x2 rotation acts on the q-row
  // pair and on the p-row pair.
  void apply_bond_rotation(double phi, int i, int j) {
    const double c = std::cos(phi), sn = std::sin(phi);
    for (int off : {0, modes_}) {
      const int a = off + i, b = off + j;
      Eigen::RowVectorXd row_a = c * s_.row(a) + sn * s_.row(b);
      s_.row(b) = -sn * s_.row(a) + c * s_.row(b);
      s_.row(a) = row_a;
    }
  }

  // S_2 of the contiguous region [0, cut) in nats.
  //
  // With rows of S restricted to the region's quadratures, det(2 M_region) is
  // the Gram determinant of the row slab, i.e. the squared product of the R
  // diagonal of a QR factorization of the transposed slab. Columns are
  // ordered q_0, p_0, q_1, p_1, ... so every even-length prefix corresponds
  // to a whole-mode subregion; that keeps the partial products bounded below
  // by 1 and the small R diagonals relative to their own column scale.
  double region_renyi2(int cut) const {
    if (cut < 1 || cut >= modes_) {
      throw std::invalid_argument("PureFrame: cut must be in [1, modes)");
    }
    const int n = 2 * modes_, d = 2 * cut;
    Eigen::MatrixXd slab(n, d);
    for (int t = 0; t < cut; ++t) {
      slab.col(2 * t) = s_.row(t).transpose();
      slab.col(2 * t + 1) = s_.row(modes_ + t).transpose();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(slab);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += std::log(std::abs(qr.matrixQR()(i, i)));
    return sum;
  }

  // Covariance snapshot; for cross-checks at shallow depth only.
  GaussianState to_state() const {
    return GaussianState::from_covariance(modes_, 0.5 * s_ * s_.transpose());
  }

 private:
  int modes_;
  Eigen::MatrixXd s_;
};

}  // namespace cvsim
