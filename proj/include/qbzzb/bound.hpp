#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

#include "qbzzb/prior.hpp"
#include "qbzzb/quadrature.hpp"
#include "qbzzb/resource.hpp"
#include "qbzzb/specfun.hpp"
#include "qbzzb/types.hpp"

namespace qbzzb {

/// Label for where a bound sits between its two analytic limits. Purely
/// descriptive; thresholds tau0/tau_F < 0.01 and > 100 do not affect any
/// numeric output.
enum class Regime { kPriorDominated, kIntermediate, kHeisenberg };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::kPriorDominated: return "prior-dominated";
    case Regime::kIntermediate: return "intermediate";
    case Regime::kHeisenberg: return "heisenberg";
  }
  return "unknown";
}

/// Directional mean-square-error lower bound and its analytic limits.
template <typename Scalar = double>
struct BoundResult {
  Scalar tau0;              ///< prior time scale at v0, 2 sqrt(2 u^T Sigma0 u)
  Scalar tau_f;             ///< resource time, 1/(2 lambda H_+); +inf for H_+ = 0
  Scalar z;                 ///< the bound on u^T Sigma u
  Scalar prior_limit;       ///< u^T Sigma0 u = tau0^2 / 8
  Scalar asymptotic_limit;  ///< tau_F^2 / 20 = 1/(80 lambda^2 H_+^2)
  Regime regime;
};

namespace detail {

template <typename Scalar>
Regime classify_regime(Scalar tau0_over_tauf) {
  if (tau0_over_tauf < Scalar(0.01L)) return Regime::kPriorDominated;
  if (tau0_over_tauf > Scalar(100)) return Regime::kHeisenberg;
  return Regime::kIntermediate;
}

}  // namespace detail

/// The bound quadrature
///   Z = 1/2 int_0^{tau_F} tau erfc(tau/tau0) (1 - sqrt(tau/tau_F)) dtau.
///
/// For finite tau_F the substitution tau = tau_F s^2 removes the square-root
/// cusp, leaving Z = tau_F^2 int_0^1 s^3 (1-s) erfc(tau_F s^2 / tau0) ds,
/// which is smooth and handled by adaptive Gauss-Kronrod quadrature. For
/// tau_F = +inf the integral collapses to the closed form tau0^2 / 8.
template <typename Scalar = double>
Scalar z_integral(Scalar tau0, Scalar tau_f, Scalar rel_tol = Scalar(1e-8L)) {
  if (!(tau0 > Scalar(0)) || !std::isfinite(tau0)) {
    throw std::domain_error("z_integral: tau0 must be positive and finite");
  }
  if (!(tau_f > Scalar(0))) {
    throw std::domain_error("z_integral: tau_f must be positive");
  }
  if (!(rel_tol > Scalar(1e-14L)) || !(rel_tol < Scalar(1e-2L))) {
    throw std::domain_error("z_integral: rel_tol must lie in (1e-14, 1e-2)");
  }
  if (std::isinf(tau_f)) {
    return tau0 * tau0 / 8;
  }
  const Scalar ratio = tau0 / tau_f;
  // Beyond these ratios the quadrature value is indistinguishable from the
  // analytic limit at any permitted rel_tol; short-circuiting also keeps
  // tau_f^2 out of overflow territory for degenerate inputs.
  if (ratio < Scalar(1e-28L)) return tau0 * tau0 / 8;    // limit error ~ 0.83 sqrt(ratio)
  if (ratio > Scalar(1e15L)) return tau_f * tau_f / 20;  // limit error ~ 0.54 / ratio

  const auto integrand = [tau0, tau_f](Scalar s) {
    return s * s * s * (Scalar(1) - s) * std::erfc(tau_f * s * s / tau0);
  };
  // Seed panel edges around the erfc rolloff scale so extreme tau0/tau_f
  // ratios cannot hide the integrand's support from the first panels.
  std::vector<Scalar> breaks{Scalar(0), Scalar(1)};
  const Scalar s_unit = std::sqrt(tau0 / tau_f);  // erfc argument reaches 1
  for (Scalar mult : {Scalar(1), Scalar(2.5L), Scalar(6)}) {
    const Scalar s = s_unit * mult;
    if (s > Scalar(1e-12L) && s < Scalar(1) - Scalar(1e-12L)) breaks.push_back(s);
  }
  const auto q = integrate_adaptive(integrand, breaks, rel_tol,
                                    std::numeric_limits<Scalar>::denorm_min());
  if (!q.converged) {
    throw std::runtime_error("z_integral: quadrature did not converge");
  }
  return tau_f * tau_f * q.value;
}

/// Directional QBZZB through the surrogate direction v0 = Sigma0 u/(u^T Sigma0 u):
/// tau0(v0) = 2 sqrt(2 u^T Sigma0 u), tau_F(v0) from the resource projected on
/// v0, then the Z quadrature. The max over shift directions v is deliberately
/// not searched, so the result is a valid lower bound that may be loose.
template <typename Scalar = double>
BoundResult<Scalar> directional_bound(const GaussianPrior<Scalar>& prior,
                                      const ProbeSpectrum<Scalar>& spec,
                                      const Direction<Scalar>& u,
                                      std::optional<std::type_identity_t<Scalar>> h0 = std::nullopt,
                                      Scalar rel_tol = Scalar(1e-8L)) {
  if (prior.dimension() != spec.dimension() || prior.dimension() != u.dimension()) {
    throw std::invalid_argument("directional_bound: dimension mismatch");
  }
  const Scalar quad = u.vector().dot(prior.sigma0() * u.vector());
  if (!(quad > Scalar(0))) {
    throw std::domain_error("directional_bound: u^T Sigma0 u must be positive");
  }
  const VectorX<Scalar> v0 = v_zero(prior, u);
  const Scalar t0 = 2 * std::sqrt(2 * quad);
  const ResourceSummary<Scalar> rs = h_plus(spec, v0, h0);

  BoundResult<Scalar> out;
  out.tau0 = t0;
  out.tau_f = rs.tau_f;
  out.prior_limit = quad;
  if (std::isinf(rs.tau_f)) {
    // No spread in v^T n: the probe cannot beat the prior.
    out.z = quad;
    out.asymptotic_limit = std::numeric_limits<Scalar>::infinity();
    out.regime = Regime::kPriorDominated;
  } else {
    out.z = z_integral(t0, rs.tau_f, rel_tol);
    out.asymptotic_limit = rs.tau_f * rs.tau_f / 20;
    out.regime = detail::classify_regime(t0 / rs.tau_f);
  }
  return out;
}

/// Bound for a single parameter x_k: directional_bound with u = e_k. For a
/// diagonal prior the resource reduces to <|n_k - H0|> and the
/// single-parameter bound is recovered.
template <typename Scalar = double>
BoundResult<Scalar> parameter_bound(const GaussianPrior<Scalar>& prior,
                                    const ProbeSpectrum<Scalar>& spec, Index k,
                                    std::optional<std::type_identity_t<Scalar>> h0 = std::nullopt,
                                    Scalar rel_tol = Scalar(1e-8L)) {
  if (k < 0 || k >= prior.dimension()) {
    throw std::out_of_range("parameter_bound: parameter index out of range");
  }
  VectorX<Scalar> u = VectorX<Scalar>::Zero(prior.dimension());
  u[k] = Scalar(1);
  return directional_bound(prior, spec, Direction<Scalar>(u), h0, rel_tol);
}

/// Weighted-photon upper bound on the resource for parameter k with H0 = 0:
/// H_+k <= (1/Sigma0_kk) sum_l |Sigma0_kl| <n_l>. Combined with the asymptote
/// this yields the weaker but spectrum-free limit 1/(80 lambda^2 bound^2).
template <typename Scalar, typename Derived>
Scalar weighted_photon_upper(const GaussianPrior<Scalar>& prior,
                             const Eigen::MatrixBase<Derived>& mean_photons, Index k) {
  VectorX<Scalar> n = mean_photons;
  if (n.size() != prior.dimension()) {
    throw std::invalid_argument("weighted_photon_upper: dimension mismatch");
  }
  if (k < 0 || k >= prior.dimension()) {
    throw std::out_of_range("weighted_photon_upper: parameter index out of range");
  }
  if ((n.array() < Scalar(0)).any() || !n.allFinite()) {
    throw std::domain_error("weighted_photon_upper: mean photon numbers must be nonnegative");
  }
  return prior.sigma0().col(k).cwiseAbs().dot(n) / prior.sigma0()(k, k);
}

/// Generic Bell-type bound for one fixed shift direction v with u^T v = 1:
///   int_0^inf tau erfc(tau/tau0(v)) P_e(tau, v) dtau,
/// for an x-independent discrimination-error model P_e in [0, 1/2]. The max
/// over v is the caller's responsibility. The improper integral is marched in
/// half-tau0 blocks and truncated once the integrand falls below 1e-16 of its
/// running maximum.
template <typename Scalar, typename PeModel>
Scalar bzzb_generic(const GaussianPrior<Scalar>& prior, PeModel&& pe_model,
                    const Direction<Scalar>& u, const VectorX<Scalar>& v,
                    Scalar rel_tol = Scalar(1e-8L)) {
  if (u.dimension() != prior.dimension() || v.size() != prior.dimension()) {
    throw std::invalid_argument("bzzb_generic: dimension mismatch");
  }
  const Scalar uv = u.vector().dot(v);
  if (std::abs(uv - Scalar(1)) > Scalar(1e-9L)) {
    throw std::invalid_argument("bzzb_generic: v must satisfy u^T v = 1");
  }
  const Scalar t0 = tau0(prior, v);

  const auto integrand = [&](Scalar tau) {
    const Scalar pe = pe_model(tau, v);
    if (!(pe >= Scalar(-1e-12L)) || !(pe <= Scalar(0.5L) + Scalar(1e-12L))) {
      throw std::domain_error("bzzb_generic: pe_model left [0, 1/2]");
    }
    return tau * erfc_std(tau / t0) * pe;
  };

  const Scalar block = t0 / 2;
  Scalar total = Scalar(0);
  Scalar max_sample = Scalar(0);
  for (int j = 0; j < 64; ++j) {
    const auto q = integrate_adaptive(integrand, Scalar(j) * block, Scalar(j + 1) * block,
                                      rel_tol / 4,
                                      std::max(Scalar(1e-18L) * std::abs(total),
                                               std::numeric_limits<Scalar>::denorm_min()));
    total += q.value;
    max_sample = std::max(max_sample, q.max_abs_sample);
    if (j >= 2 && q.max_abs_sample < Scalar(1e-16L) * max_sample) break;
  }
  return total;
}

/// One row of the ratio scan behind the log-log bound plot.
template <typename Scalar = double>
struct ScanRow {
  Scalar ratio;                  ///< tau0 / tau_F
  Scalar z_over_tauf2;           ///< Z / tau_F^2, approaches 1/20 for large ratio
  Scalar z_over_tau02;           ///< Z / tau0^2, approaches 1/8 for small ratio
  Scalar prior_limit_norm;       ///< prior limit / tau0^2 = 1/8
  Scalar asymptotic_limit_norm;  ///< asymptotic limit / tau_F^2 = 1/20
};

/// Evaluates the normalized bound over a grid of tau0/tau_F ratios. Z/tau0^2
/// depends on the ratio alone, so each row is computed at tau0 = 1.
template <typename Scalar = double>
std::vector<ScanRow<Scalar>> scan(const std::vector<Scalar>& tau_ratio_grid,
                                  Scalar rel_tol = Scalar(1e-8L)) {
  std::vector<ScanRow<Scalar>> rows;
  rows.reserve(tau_ratio_grid.size());
  for (Scalar ratio : tau_ratio_grid) {
    if (!(ratio > Scalar(0)) || !std::isfinite(ratio)) {
      throw std::domain_error("scan: ratios must be positive and finite");
    }
    const Scalar z = z_integral(Scalar(1), Scalar(1) / ratio, rel_tol);
    rows.push_back({ratio, z * ratio * ratio, z, Scalar(1) / 8, Scalar(1) / 20});
  }
  return rows;
}

}  // namespace qbzzb
