#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "qbzzb/specfun.hpp"
#include "qbzzb/types.hpp"

namespace qbzzb {

/// Finite joint distribution P_m over generator eigenvalue vectors m.
///
/// Rows of eigenvalues() are the support points (length-K vectors, e.g. joint
/// photon numbers); probabilities() are the matching weights. Generators may
/// have arbitrary real spectra, so componentwise nonnegativity is not
/// enforced here.
template <typename Scalar = double>
class ProbeSpectrum {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  ProbeSpectrum(Matrix eigenvalues, Vector probabilities)
      : m_(std::move(eigenvalues)), p_(std::move(probabilities)) {
    if (m_.rows() == 0 || m_.cols() == 0) {
      throw std::invalid_argument("ProbeSpectrum: empty support");
    }
    if (p_.size() != m_.rows()) {
      throw std::invalid_argument("ProbeSpectrum: support/probability size mismatch");
    }
    if (!m_.allFinite() || !p_.allFinite()) {
      throw std::domain_error("ProbeSpectrum: entries must be finite");
    }
    if ((p_.array() < Scalar(0)).any()) {
      throw std::domain_error("ProbeSpectrum: probabilities must be nonnegative");
    }
    if (std::abs(p_.sum() - Scalar(1)) > Scalar(1e-12L)) {
      throw std::domain_error("ProbeSpectrum: probabilities must sum to 1 within 1e-12");
    }
  }

  Index dimension() const { return m_.cols(); }
  Index support_size() const { return m_.rows(); }
  const Matrix& eigenvalues() const { return m_; }
  const Vector& probabilities() const { return p_; }

 private:
  Matrix m_;  // support_size x K
  Vector p_;
};

/// Scalar distribution of s = v^T m, sorted ascending with merged duplicates.
template <typename Scalar = double>
struct ProjectedDistribution {
  VectorX<Scalar> values;
  VectorX<Scalar> weights;
};

/// Resource summary for one projection direction: the mean absolute deviation
/// H_+ = <|v^T n - H0|>, the offset H0 used, and the resource time
/// tau_F = 1 / (2 lambda H_+), infinite when H_+ = 0.
template <typename Scalar = double>
struct ResourceSummary {
  Scalar h_plus;
  Scalar h0;
  Scalar tau_f;
};

/// Marginal distribution of v^T m under P_m. Values closer than 1e-12 are
/// merged (probability-weighted mean); zero-weight atoms are dropped.
template <typename Scalar, typename Derived>
ProjectedDistribution<Scalar> project(const ProbeSpectrum<Scalar>& spec,
                                      const Eigen::MatrixBase<Derived>& v) {
  VectorX<Scalar> vv = v;
  if (vv.size() != spec.dimension()) {
    throw std::invalid_argument("project: direction dimension mismatch");
  }
  const VectorX<Scalar> s = spec.eigenvalues() * vv;

  std::vector<Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&s](Index a, Index b) { return s[a] < s[b]; });

  std::vector<Scalar> values, weights;
  values.reserve(order.size());
  weights.reserve(order.size());
  for (Index idx : order) {
    const Scalar si = s[idx];
    const Scalar pi = spec.probabilities()[idx];
    if (pi == Scalar(0)) continue;
    if (!values.empty() && si - values.back() <= Scalar(1e-12L)) {
      const Scalar w = weights.back() + pi;
      values.back() = (values.back() * weights.back() + si * pi) / w;
      weights.back() = w;
    } else {
      values.push_back(si);
      weights.push_back(pi);
    }
  }
  if (values.empty()) {
    throw std::domain_error("project: distribution has no mass");
  }

  ProjectedDistribution<Scalar> out;
  out.values = Eigen::Map<const VectorX<Scalar>>(values.data(), static_cast<Index>(values.size()));
  out.weights = Eigen::Map<const VectorX<Scalar>>(weights.data(), static_cast<Index>(weights.size()));
  return out;
}

/// Lower weighted median of a projected distribution: the smallest value whose
/// cumulative weight reaches one half. Any median minimizes the mean absolute
/// deviation, and the deviation itself is invariant across the median interval.
template <typename Scalar>
Scalar weighted_median(const ProjectedDistribution<Scalar>& dist) {
  const Scalar half = dist.weights.sum() / 2;
  Scalar cum = Scalar(0);
  for (Index i = 0; i < dist.values.size(); ++i) {
    cum += dist.weights[i];
    if (cum >= half - Scalar(1e-12L)) return dist.values[i];
  }
  return dist.values[dist.values.size() - 1];
}

/// Mean absolute deviation H_+ of v^T n about H0 and the induced tau_F.
/// When h0 is omitted, H0 defaults to the lower weighted median of the
/// projected distribution, which minimizes H_+ and hence maximizes tau_F.
template <typename Scalar, typename Derived>
ResourceSummary<Scalar> h_plus(const ProbeSpectrum<Scalar>& spec,
                               const Eigen::MatrixBase<Derived>& v,
                               std::optional<std::type_identity_t<Scalar>> h0 = std::nullopt) {
  const ProjectedDistribution<Scalar> dist = project(spec, v);
  const Scalar offset = h0.has_value() ? *h0 : weighted_median(dist);
  if (!std::isfinite(offset)) {
    throw std::domain_error("h_plus: H0 must be finite");
  }
  const Scalar h = dist.weights.dot((dist.values.array() - offset).abs().matrix());
  const Scalar lam = lambda_constant<Scalar>().lambda;
  const Scalar tau_f =
      h > Scalar(0) ? Scalar(1) / (2 * lam * h) : std::numeric_limits<Scalar>::infinity();
  return {h, offset, tau_f};
}

/// Characteristic-function fidelity lower bound
/// |<exp(i tau v^T n)>|^2 = sum_{m,l} P_m P_l cos[tau v^T (m - l)],
/// clamped into [0, 1] against roundoff. Equals 1 at tau = 0.
template <typename Scalar, typename Derived>
Scalar char_fn_fidelity_lb(const ProbeSpectrum<Scalar>& spec,
                           const Eigen::MatrixBase<Derived>& v, Scalar tau) {
  if (!std::isfinite(tau)) {
    throw std::domain_error("char_fn_fidelity_lb: tau must be finite");
  }
  VectorX<Scalar> vv = v;
  if (vv.size() != spec.dimension()) {
    throw std::invalid_argument("char_fn_fidelity_lb: direction dimension mismatch");
  }
  const VectorX<Scalar> s = spec.eigenvalues() * vv;
  std::complex<Scalar> ch(0, 0);
  for (Index i = 0; i < s.size(); ++i) {
    ch += spec.probabilities()[i] *
          std::complex<Scalar>(std::cos(tau * s[i]), std::sin(tau * s[i]));
  }
  return std::clamp(std::norm(ch), Scalar(0), Scalar(1));
}

/// Truncated linear fidelity bound F >= Lambda(tau / tau_F), i.e.
/// 1 - 2 lambda H_+ tau clipped at zero.
template <typename Scalar>
Scalar fidelity_lb_truncated(const ResourceSummary<Scalar>& summary, Scalar tau) {
  if (!(summary.tau_f > Scalar(0))) {
    throw std::domain_error("fidelity_lb_truncated: tau_f must be positive");
  }
  if (!(tau >= Scalar(0))) {
    throw std::domain_error("fidelity_lb_truncated: tau must be nonnegative");
  }
  return lambda_fn(std::isinf(summary.tau_f) ? Scalar(0) : tau / summary.tau_f);
}

/// Helstrom-type error-probability bound P_e >= (1 - sqrt(1 - F)) / 2 from a
/// fidelity lower bound F in [0, 1].
template <typename Scalar>
Scalar pe_lb_quantum(Scalar fidelity_lb) {
  if (!(fidelity_lb >= Scalar(-1e-12L)) || !(fidelity_lb <= Scalar(1) + Scalar(1e-12L))) {
    throw std::domain_error("pe_lb_quantum: fidelity must lie in [0, 1]");
  }
  const Scalar f = std::clamp(fidelity_lb, Scalar(0), Scalar(1));
  return (Scalar(1) - std::sqrt(Scalar(1) - f)) / 2;
}

/// Uhlmann fidelity between the shifted states of a pure probe. For a pure
/// probe the characteristic function is the inner product itself, so the
/// char_fn bound is tight and this is the exact value, not just a bound.
template <typename Scalar, typename Derived>
Scalar exact_pure_fidelity(const ProbeSpectrum<Scalar>& spec,
                           const Eigen::MatrixBase<Derived>& v, Scalar tau) {
  return char_fn_fidelity_lb(spec, v, tau);
}

}  // namespace qbzzb
