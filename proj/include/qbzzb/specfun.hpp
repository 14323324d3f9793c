#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbzzb {

/// Joint solution of lambda = sin(phi) = (1 - cos(phi))/phi, the slope of the
/// global chord bound cos(theta) >= 1 - lambda*|theta|.
template <typename Scalar = double>
struct LambdaConstant {
  Scalar phi;     ///< touching angle, in (0, pi)
  Scalar lambda;  ///< chord slope, about 0.7246
};

/// Standard complementary error function, (2/sqrt(pi)) * int_z^inf exp(-xi^2) dxi.
/// Monotone decreasing, erfc_std(0) = 1, range [0, 2].
template <typename Scalar>
Scalar erfc_std(Scalar z) {
  if (!std::isfinite(z)) {
    throw std::domain_error("erfc_std: argument must be finite");
  }
  return std::erfc(z);
}

/// Solves lambda = sin(phi) = (1 - cos(phi))/phi by bracketed bisection.
///
/// The two defining identities reduce to tan(phi/2) = phi via the half-angle
/// formulas, with a single root in (0, pi) away from zero. The bracket
/// (1.6, 3.1) stays clear of the tan pole at phi = pi.
template <typename Scalar = double>
LambdaConstant<Scalar> solve_lambda(Scalar tol) {
  if (!(tol > Scalar(0))) {
    throw std::domain_error("solve_lambda: tol must be positive");
  }
  const auto g = [](Scalar p) { return std::tan(p / 2) - p; };
  Scalar lo = Scalar(1.6L);  // g(lo) < 0
  Scalar hi = Scalar(3.1L);  // g(hi) > 0
  // |g'| < 2.3 near the root, so a bracket of width tol/8 leaves |g| well
  // under tol at the midpoint.
  for (int i = 0; i < 200 && hi - lo > tol / 8; ++i) {
    const Scalar mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;  // bracket at machine resolution
    (g(mid) < Scalar(0) ? lo : hi) = mid;
  }
  const Scalar phi = (lo + hi) / 2;
  return {phi, std::sin(phi)};
}

/// Immutable process-wide constant, solved once to 1e-12.
template <typename Scalar = double>
const LambdaConstant<Scalar>& lambda_constant() {
  static const LambdaConstant<Scalar> k = solve_lambda<Scalar>(Scalar(1e-12L));
  return k;
}

/// Truncation function Lambda(r) = max(1 - r, 0) for r >= 0.
template <typename Scalar>
Scalar lambda_fn(Scalar r) {
  if (!(r >= Scalar(0))) {  // rejects negatives and NaN
    throw std::domain_error("lambda_fn: argument must be nonnegative");
  }
  return r < Scalar(1) ? Scalar(1) - r : Scalar(0);
}

}  // namespace qbzzb
