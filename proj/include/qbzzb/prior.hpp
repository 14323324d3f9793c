#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "qbzzb/specfun.hpp"
#include "qbzzb/types.hpp"

namespace qbzzb {

/// Gaussian prior over the parameter vector: mean and covariance Sigma0.
///
/// Construction validates symmetry (1e-12 relative) and positive definiteness
/// (smallest eigenvalue > 1e-10 of the largest); matrices failing either check
/// are rejected rather than regularized. The Cholesky factor is cached so that
/// Sigma0^{-1} v is always a solve, never an explicit inverse.
template <typename Scalar = double>
class GaussianPrior {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  GaussianPrior(Vector mean, Matrix sigma0)
      : mean_(std::move(mean)), sigma0_(std::move(sigma0)) {
    if (sigma0_.rows() == 0 || sigma0_.rows() != sigma0_.cols()) {
      throw std::invalid_argument("GaussianPrior: sigma0 must be square and nonempty");
    }
    if (mean_.size() != sigma0_.rows()) {
      throw std::invalid_argument("GaussianPrior: mean/sigma0 dimension mismatch");
    }
    if (!sigma0_.allFinite() || !mean_.allFinite()) {
      throw std::domain_error("GaussianPrior: entries must be finite");
    }
    const Scalar scale = sigma0_.cwiseAbs().maxCoeff();
    if (!(scale > Scalar(0))) {
      throw std::domain_error("GaussianPrior: sigma0 must be nonzero");
    }
    if ((sigma0_ - sigma0_.transpose()).cwiseAbs().maxCoeff() >= Scalar(1e-12L) * scale) {
      throw std::domain_error("GaussianPrior: sigma0 is not symmetric");
    }
    sigma0_ = ((sigma0_ + sigma0_.transpose()) / 2).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma0_, Eigen::EigenvaluesOnly);
    const Scalar lo = es.eigenvalues().minCoeff();
    const Scalar hi = es.eigenvalues().maxCoeff();
    if (!(lo > Scalar(1e-10L) * hi)) {
      throw std::domain_error("GaussianPrior: sigma0 is not positive definite (ill-conditioned prior)");
    }
    llt_.compute(sigma0_);
    if (llt_.info() != Eigen::Success) {
      throw std::domain_error("GaussianPrior: Cholesky factorization failed");
    }
  }

  static GaussianPrior zero_mean(Matrix sigma0) {
    Vector mean = Vector::Zero(sigma0.rows());
    return GaussianPrior(std::move(mean), std::move(sigma0));
  }

  Index dimension() const { return sigma0_.rows(); }
  const Vector& mean() const { return mean_; }
  const Matrix& sigma0() const { return sigma0_; }

  /// Sigma0^{-1} rhs via the cached Cholesky factorization.
  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }

 private:
  Vector mean_;
  Matrix sigma0_;
  Eigen::LLT<Matrix> llt_;
};

/// Direction u selecting the error component u^T Sigma u; any nonzero vector.
template <typename Scalar = double>
class Direction {
 public:
  explicit Direction(VectorX<Scalar> u) : u_(std::move(u)) {
    if (u_.size() == 0 || !u_.allFinite() || u_.norm() == Scalar(0)) {
      throw std::invalid_argument("Direction: u must be a nonzero finite vector");
    }
  }

  Index dimension() const { return u_.size(); }
  const VectorX<Scalar>& vector() const { return u_; }

 private:
  VectorX<Scalar> u_;
};

/// Stationary Ornstein-Uhlenbeck prior parameters with a sampling grid.
template <typename Scalar = double>
class OUProcess {
 public:
  OUProcess(Scalar sigma0_var, Scalar t_corr, VectorX<Scalar> grid)
      : sigma0_var_(sigma0_var), t_corr_(t_corr), grid_(std::move(grid)) {
    if (!(sigma0_var_ > Scalar(0)) || !(t_corr_ > Scalar(0))) {
      throw std::domain_error("OUProcess: sigma0_var and t_corr must be positive");
    }
    if (grid_.size() == 0 || !grid_.allFinite()) {
      throw std::invalid_argument("OUProcess: grid must be nonempty and finite");
    }
    for (Index i = 0; i + 1 < grid_.size(); ++i) {
      if (!(grid_[i] < grid_[i + 1])) {
        throw std::domain_error("OUProcess: grid must be strictly increasing");
      }
    }
  }

  Scalar sigma0_var() const { return sigma0_var_; }
  Scalar t_corr() const { return t_corr_; }
  const VectorX<Scalar>& grid() const { return grid_; }

 private:
  Scalar sigma0_var_;
  Scalar t_corr_;
  VectorX<Scalar> grid_;
};

/// Prior time scale tau0 = sqrt(8 / (v^T Sigma0^{-1} v)).
template <typename Scalar, typename Derived>
Scalar tau0(const GaussianPrior<Scalar>& prior, const Eigen::MatrixBase<Derived>& v) {
  VectorX<Scalar> vv = v;
  if (vv.size() != prior.dimension()) {
    throw std::invalid_argument("tau0: direction dimension mismatch");
  }
  if (!vv.allFinite() || vv.norm() == Scalar(0)) {
    throw std::domain_error("tau0: v must be a nonzero finite vector");
  }
  const Scalar quad = vv.dot(prior.solve(vv));
  if (!(quad > Scalar(0)) || !std::isfinite(quad)) {
    throw std::domain_error("tau0: ill-conditioned prior quadratic form");
  }
  return std::sqrt(Scalar(8) / quad);
}

/// Minimum density overlap of the prior with its shift by v*tau:
/// int min[P(x), P(x + v tau)] dx = erfc(tau / tau0).
template <typename Scalar, typename Derived>
Scalar min_overlap(const GaussianPrior<Scalar>& prior, const Eigen::MatrixBase<Derived>& v,
                   Scalar tau) {
  if (!(tau >= Scalar(0))) {
    throw std::domain_error("min_overlap: tau must be nonnegative");
  }
  return erfc_std(tau / tau0(prior, v));
}

/// The shift direction v0 = Sigma0 u / (u^T Sigma0 u) that maximizes the
/// overlap factor erfc(tau/tau0) subject to u^T v = 1. At v0 the prior time
/// scale takes the closed form tau0(v0) = 2 sqrt(2 u^T Sigma0 u).
template <typename Scalar>
VectorX<Scalar> v_zero(const GaussianPrior<Scalar>& prior, const Direction<Scalar>& u) {
  if (u.dimension() != prior.dimension()) {
    throw std::invalid_argument("v_zero: direction dimension mismatch");
  }
  const VectorX<Scalar> su = prior.sigma0() * u.vector();
  const Scalar quad = u.vector().dot(su);
  if (!(quad > Scalar(0))) {
    throw std::domain_error("v_zero: u^T Sigma0 u must be positive");
  }
  return su / quad;
}

/// Zero-mean Gaussian prior with OU covariance sigma0 * exp(-|t_k - t_l| / T0).
/// The kernel is strictly positive definite on distinct grid points.
template <typename Scalar>
GaussianPrior<Scalar> ou_covariance(const OUProcess<Scalar>& ou) {
  const auto& t = ou.grid();
  const Index n = t.size();
  MatrixX<Scalar> cov(n, n);
  for (Index i = 0; i < n; ++i) {
    cov(i, i) = ou.sigma0_var();
    for (Index j = 0; j < i; ++j) {
      const Scalar c = ou.sigma0_var() * std::exp(-std::abs(t[i] - t[j]) / ou.t_corr());
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return GaussianPrior<Scalar>::zero_mean(std::move(cov));
}

}  // namespace qbzzb
