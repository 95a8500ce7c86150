#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "mtd/error.hpp"

namespace mtd {

/// Eigendecomposition of a reversible generator, orthonormal in L2(mu).
///
/// Built from the symmetrized matrix D^{1/2} L D^{-1/2} with D = diag(mu). Eigenvalues
/// are stored in decreasing order, so index 0 is the stationary mode (eigenvalue 0,
/// constant eigenvector). Also holds the mean-zero pseudo-inverse of L used by the
/// Poisson solve and by the transport solver.
class SpectralCache {
 public:
  SpectralCache(const Eigen::MatrixXd& generator, const Eigen::VectorXd& measure) {
    const Eigen::Index m = generator.rows();
    const Eigen::VectorXd sq = measure.array().sqrt();
    Eigen::MatrixXd sym = sq.asDiagonal() * generator * sq.cwiseInverse().asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    // ascending from the solver; flip so the zero mode comes first
    eigenvalues_ = solver.eigenvalues().reverse();
    eigenvectors_.resize(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      eigenvectors_.col(k) = sq.cwiseInverse().cwiseProduct(solver.eigenvectors().col(m - 1 - k));
    }

    scale_ = std::max(1.0, generator.cwiseAbs().rowwise().sum().maxCoeff());
    const double cutoff = 1e-12 * scale_;
    kernel_dim_ = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (std::abs(eigenvalues_(k)) < cutoff) ++kernel_dim_;
    }
    if (kernel_dim_ == 1) {
      eigenvalues_(0) = 0.0;
      eigenvectors_.col(0).setOnes();
    }
    for (Eigen::Index k = 1; k < m; ++k) {
      // deterministic sign: first entry with visible magnitude is positive
      Eigen::Index arg = 0;
      eigenvectors_.col(k).cwiseAbs().maxCoeff(&arg);
      if (eigenvectors_(arg, k) < 0) eigenvectors_.col(k) *= -1.0;
    }

    weighted_ = eigenvectors_.transpose() * measure.asDiagonal();
    if (kernel_dim_ == 1) {
      Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
      for (Eigen::Index k = 1; k < m; ++k) inv(k) = 1.0 / eigenvalues_(k);
      pseudo_inverse_ = eigenvectors_ * inv.asDiagonal() * weighted_;
    }
  }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  Eigen::Index kernel_dimension() const { return kernel_dim_; }
  bool irreducible() const { return kernel_dim_ == 1; }

  /// Smallest nonzero |eigenvalue|; zero when the chain is reducible or trivial.
  double spectral_gap() const {
    if (kernel_dim_ != 1 || eigenvalues_.size() < 2) return 0.0;
    return -eigenvalues_(1);
  }

  /// Mean-zero pseudo-inverse M with L M r = r for every mu-centred r.
  const Eigen::MatrixXd& pseudo_inverse() const {
    require(irreducible(), Errc::ReducibleChain, "generator kernel has dimension " + std::to_string(kernel_dim_));
    return pseudo_inverse_;
  }

  Eigen::VectorXd evolve(const Eigen::VectorXd& f, double t) const {
    const Eigen::VectorXd coeff = weighted_ * f;
    const Eigen::VectorXd decay = (eigenvalues_ * t).array().exp().matrix();
    return eigenvectors_ * coeff.cwiseProduct(decay);
  }

  /// e^{tL} as a dense matrix.
  Eigen::MatrixXd kernel(double t) const {
    const Eigen::VectorXd decay = (eigenvalues_ * t).array().exp().matrix();
    return eigenvectors_ * decay.asDiagonal() * weighted_;
  }

  double generator_scale() const { return scale_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd weighted_;  // Psi^T D
  Eigen::MatrixXd pseudo_inverse_;
  Eigen::Index kernel_dim_ = 0;
  double scale_ = 1.0;
};

}  // namespace mtd
