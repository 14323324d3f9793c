#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbzzb/bound.hpp"
#include "qbzzb/prior.hpp"
#include "qbzzb/resource.hpp"
#include "qbzzb/specfun.hpp"
#include "qbzzb/types.hpp"

namespace qbzzb {

/// Outcome of checking one achieved-MSE witness against its computed bound.
/// pass <=> margin >= -1e-9 * max(1, bound).
template <typename Scalar = double>
struct OracleReport {
  std::string instance_id;
  Scalar achieved_mse;
  Scalar bound;
  Scalar margin;
  bool pass;
};

template <typename Scalar>
OracleReport<Scalar> make_report(std::string instance_id, Scalar achieved_mse, Scalar bound) {
  const Scalar margin = achieved_mse - bound;
  const bool pass = margin >= Scalar(-1e-9L) * std::max(Scalar(1), bound);
  return {std::move(instance_id), achieved_mse, bound, margin, pass};
}

/// Exact Bayes MSE of the posterior-mean estimator for the linear-Gaussian
/// model y = H x + w, w ~ N(0, R):
///   u^T (Sigma0 - Sigma0 H^T (H Sigma0 H^T + R)^{-1} H Sigma0) u.
template <typename Scalar = double>
Scalar linear_gaussian_mmse(const GaussianPrior<Scalar>& prior, const MatrixX<Scalar>& h_matrix,
                            const MatrixX<Scalar>& noise_cov, const Direction<Scalar>& u) {
  const Index k = prior.dimension();
  if (h_matrix.cols() != k || u.dimension() != k) {
    throw std::invalid_argument("linear_gaussian_mmse: dimension mismatch");
  }
  if (noise_cov.rows() != h_matrix.rows() || noise_cov.cols() != h_matrix.rows()) {
    throw std::invalid_argument("linear_gaussian_mmse: noise covariance shape mismatch");
  }
  const MatrixX<Scalar> innovation =
      h_matrix * prior.sigma0() * h_matrix.transpose() + noise_cov;
  Eigen::LLT<MatrixX<Scalar>> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("linear_gaussian_mmse: singular innovation covariance");
  }
  const MatrixX<Scalar> cross = h_matrix * prior.sigma0();  // obs x K
  const MatrixX<Scalar> posterior = prior.sigma0() - cross.transpose() * llt.solve(cross);
  return u.vector().dot(posterior * u.vector());
}

/// Exact error probability for discriminating two equally likely unit-variance
/// Gaussians whose means differ by d: erfc(d / (2 sqrt 2)) / 2.
template <typename Scalar>
Scalar gaussian_pe(Scalar d) {
  if (!(d >= Scalar(0))) {
    throw std::domain_error("gaussian_pe: shift must be nonnegative");
  }
  return erfc_std(d / (2 * std::sqrt(Scalar(2)))) / 2;
}

/// Spectrum induced by a pure single-mode probe sum_m c_m |m>: support
/// m = 0..D-1 with weights c_m^2.
template <typename Scalar>
ProbeSpectrum<Scalar> spectrum_from_amplitudes(const VectorX<Scalar>& amplitudes) {
  const Index d = amplitudes.size();
  MatrixX<Scalar> m(d, 1);
  VectorX<Scalar> p(d);
  for (Index i = 0; i < d; ++i) {
    m(i, 0) = Scalar(static_cast<double>(i));
    p[i] = amplitudes[i] * amplitudes[i];
  }
  p /= p.sum();  // absorb rounding from the normalization check upstream
  return ProbeSpectrum<Scalar>(std::move(m), std::move(p));
}

/// Bayes MSE of scalar phase estimation with the canonical covariant phase
/// measurement, computed by double quadrature.
///
/// The probe sum_m c_m |m> accumulates phase x ~ N(0, sigma^2); the POVM
/// |e(y)><e(y)|/2pi with |e(y)> = sum_m e^{imy} |m> has likelihood
/// P(y|x) = |sum_m c_m e^{im(y-x)}|^2 / 2pi. The posterior mean is MSE-optimal
/// for this measurement, so the result is a valid achieved-error witness for
/// any bound. x is truncated at +-8 sigma (prior mass beyond is < 1e-10 for
/// sigma <= 0.5, which the precondition enforces); y uses the periodic
/// trapezoid rule, x the trapezoid rule with explicit Gaussian weights.
template <typename Scalar = double>
Scalar quantum_phase_bayes_mse(const VectorX<Scalar>& amplitudes, Scalar prior_sigma,
                               Index x_points, Index y_points) {
  const Index d = amplitudes.size();
  if (d < 1 || d > 8) {
    throw std::invalid_argument("quantum_phase_bayes_mse: need 1 to 8 amplitudes");
  }
  if (std::abs(amplitudes.squaredNorm() - Scalar(1)) > Scalar(1e-9L)) {
    throw std::invalid_argument("quantum_phase_bayes_mse: amplitudes must be normalized");
  }
  if (!(prior_sigma > Scalar(0)) || prior_sigma > Scalar(0.5L)) {
    throw std::invalid_argument(
        "quantum_phase_bayes_mse: prior_sigma must lie in (0, 0.5] to keep wrapping error negligible");
  }
  if (x_points < 3 || y_points < 4) {
    throw std::invalid_argument("quantum_phase_bayes_mse: grid too small");
  }

  using Complex = std::complex<Scalar>;
  const Scalar two_pi = 2 * Scalar(EIGEN_PI);
  const Scalar x_lo = -8 * prior_sigma;
  const Scalar dx = 16 * prior_sigma / Scalar(static_cast<double>(x_points - 1));
  const Scalar dy = two_pi / Scalar(static_cast<double>(y_points));

  // x nodes, trapezoid weights folded with the prior density
  VectorX<Scalar> x(x_points), wpx(x_points);
  const Scalar norm = Scalar(1) / (prior_sigma * std::sqrt(two_pi));
  for (Index i = 0; i < x_points; ++i) {
    x[i] = x_lo + dx * Scalar(static_cast<double>(i));
    const Scalar w = (i == 0 || i == x_points - 1) ? dx / 2 : dx;
    wpx[i] = w * norm * std::exp(-x[i] * x[i] / (2 * prior_sigma * prior_sigma));
  }
  const Scalar ex2 = wpx.dot(x.cwiseProduct(x));

  // e^{-i m x_i} for each mode
  MatrixX<Complex> ex(x_points, d);
  for (Index i = 0; i < x_points; ++i) {
    for (Index m = 0; m < d; ++m) {
      const Scalar a = -Scalar(static_cast<double>(m)) * x[i];
      ex(i, m) = Complex(std::cos(a), std::sin(a));
    }
  }

  Scalar posterior_sq = Scalar(0);  // sum_y wy * N(y)^2 / D(y)
  VectorX<Complex> coef(d);
  for (Index j = 0; j < y_points; ++j) {
    const Scalar y = dy * Scalar(static_cast<double>(j));
    for (Index m = 0; m < d; ++m) {
      const Scalar a = Scalar(static_cast<double>(m)) * y;
      coef[m] = amplitudes[m] * Complex(std::cos(a), std::sin(a));
    }
    const VectorX<Complex> amp = ex * coef;  // sum_m c_m e^{im(y - x_i)}
    Scalar den = Scalar(0), num = Scalar(0);
    for (Index i = 0; i < x_points; ++i) {
      const Scalar lik = std::norm(amp[i]) / two_pi;
      const Scalar w = wpx[i] * lik;
      den += w;
      num += w * x[i];
    }
    if (den > Scalar(0)) posterior_sq += dy * num * num / den;
  }
  return ex2 - posterior_sq;
}

/// Grid-doubling wrapper: refines until successive values differ by less than
/// tol (default 1e-6). Throws if convergence is not reached within the
/// refinement budget.
template <typename Scalar = double>
Scalar quantum_phase_bayes_mse_converged(const VectorX<Scalar>& amplitudes,
                                         Scalar prior_sigma, Scalar tol = Scalar(1e-6L),
                                         Scalar* achieved_delta = nullptr) {
  Index nx = 801, ny = 256;
  Scalar prev = quantum_phase_bayes_mse(amplitudes, prior_sigma, nx, ny);
  for (int level = 0; level < 6; ++level) {
    nx = 2 * nx - 1;
    ny = 2 * ny;
    const Scalar cur = quantum_phase_bayes_mse(amplitudes, prior_sigma, nx, ny);
    const Scalar delta = std::abs(cur - prev);
    if (delta < tol) {
      if (achieved_delta != nullptr) *achieved_delta = delta;
      return cur;
    }
    prev = cur;
  }
  throw std::runtime_error("quantum_phase_bayes_mse: quadrature did not self-converge");
}

/// Stamps pass/fail reports for precomputed (achieved MSE, bound) pairs.
template <typename Scalar = double>
struct VerifyInstance {
  std::string instance_id;
  Scalar achieved_mse;
  Scalar bound;
};

template <typename Scalar>
std::vector<OracleReport<Scalar>> verify(const std::vector<VerifyInstance<Scalar>>& instances) {
  std::vector<OracleReport<Scalar>> reports;
  reports.reserve(instances.size());
  for (const auto& inst : instances) {
    reports.push_back(make_report(inst.instance_id, inst.achieved_mse, inst.bound));
  }
  return reports;
}

/// The built-in verification suite: classical linear-Gaussian instances
/// against the generic bound with the exact Gaussian discrimination error,
/// and canonical-phase-measurement instances against the directional bound.
/// Every achieved MSE must dominate its bound; any failure is build-breaking.
template <typename Scalar = double>
std::vector<OracleReport<Scalar>> default_verify_suite() {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  std::vector<VerifyInstance<Scalar>> instances;
  const Scalar quad_tol = Scalar(1e-12L);

  // Uninformative measurement: P_e = 1/2 saturates the prior limit.
  {
    GaussianPrior<Scalar> prior = GaussianPrior<Scalar>::zero_mean(Matrix::Identity(1, 1));
    Direction<Scalar> u{Vector::Ones(1)};
    const Vector v0 = v_zero(prior, u);
    const Scalar bound = bzzb_generic(
        prior, [](Scalar, const Vector&) { return Scalar(0.5L); }, u, v0, quad_tol);
    instances.push_back({"prior-only-k1", Scalar(1), bound});
  }

  // Linear-Gaussian models: exact MMSE vs the generic bound with the exact
  // two-point discrimination error along v0.
  const auto add_linear_gaussian = [&](const std::string& id, Matrix sigma0, Matrix h,
                                       Matrix r, Vector uvec) {
    GaussianPrior<Scalar> prior = GaussianPrior<Scalar>::zero_mean(std::move(sigma0));
    Direction<Scalar> u{std::move(uvec)};
    const Scalar mmse = linear_gaussian_mmse(prior, h, r, u);
    const Vector v0 = v_zero(prior, u);
    Eigen::LLT<Matrix> rllt(r);
    const Vector hv = h * v0;
    const Scalar rate = std::sqrt(hv.dot(rllt.solve(hv)));
    const auto pe = [rate](Scalar tau, const Vector&) { return gaussian_pe(tau * rate); };
    instances.push_back({id, mmse, bzzb_generic(prior, pe, u, v0, quad_tol)});
  };
  add_linear_gaussian("linear-gaussian-k1", Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                      Matrix::Identity(1, 1), Vector::Ones(1));
  {
    Matrix sigma0(2, 2);
    sigma0 << 2, 1, 1, 2;
    Vector u(2);
    u << 1, 0;
    add_linear_gaussian("linear-gaussian-k2", sigma0, Matrix::Identity(2, 2),
                        Matrix::Identity(2, 2), u);
  }
  {
    Matrix sigma0(3, 3);
    sigma0 << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    Matrix h(3, 3);
    h << 1, 0, 0, 0, 2, 0, 1, 0, 1;
    Vector u(3);
    u << 1, 1, 0;
    add_linear_gaussian("linear-gaussian-k3", sigma0, h, Matrix::Identity(3, 3) * Scalar(0.5L),
                        u);
  }

  // Canonical phase measurement with uniform D-mode superpositions.
  for (Index d : {Index(2), Index(3), Index(4)}) {
    for (Scalar sigma : {Scalar(0.05L), Scalar(0.1L), Scalar(0.2L)}) {
      const Vector c = Vector::Constant(d, Scalar(1) / std::sqrt(Scalar(static_cast<double>(d))));
      const Scalar mse = quantum_phase_bayes_mse_converged(c, sigma);
      GaussianPrior<Scalar> prior =
          GaussianPrior<Scalar>::zero_mean(Matrix::Identity(1, 1) * sigma * sigma);
      const auto br = directional_bound(prior, spectrum_from_amplitudes(c),
                                        Direction<Scalar>{Vector::Ones(1)}, std::nullopt,
                                        Scalar(1e-10L));
      const std::string id = "quantum-d" + std::to_string(d) + "-sigma" +
                             std::to_string(static_cast<int>(std::round(sigma * 100)));
      instances.push_back({id, mse, br.z});
    }
  }

  return verify(instances);
}

}  // namespace qbzzb
