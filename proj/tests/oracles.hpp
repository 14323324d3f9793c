// Test-only independent oracles. Everything here is deliberately implemented
// through different routes than the library (series/continued fractions
// instead of std::erfc wrappers, fixed-step composite rules instead of
// adaptive Gauss-Kronrod, a different root equation for the chord constant)
// so that agreement is evidence, not tautology.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

namespace oracles {

// erf by Taylor series, |z| <= 3.5
inline double erf_series(double z) {
  const double z2 = z * z;
  double term = z;  // z^(2n+1) / (n! ), n = 0
  double sum = 0;
  for (int n = 0; n < 200; ++n) {
    const double contrib = term / (2 * n + 1);
    sum += (n % 2 == 0) ? contrib : -contrib;
    if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    term *= z2 / (n + 1);
  }
  return 2.0 / std::sqrt(M_PI) * sum;
}

// erfc by Lentz continued fraction, z > 1:
// erfc(z) = exp(-z^2)/sqrt(pi) * cf, cf = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
inline double erfc_cf(double z) {
  const double tiny = 1e-300;
  double f = tiny, c = f, d = 0;
  for (int n = 0; n < 300; ++n) {
    const double a = (n == 0) ? 1.0 : n / 2.0;
    const double b = z;
    d = b + a * d;
    if (d == 0) d = tiny;
    c = b + a / c;
    if (c == 0) c = tiny;
    d = 1 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1) < 1e-17) break;
  }
  return std::exp(-z * z) / std::sqrt(M_PI) * f;
}

inline double erfc_oracle(double z) {
  if (z < 0) return 2 - erfc_oracle(-z);
  if (z <= 3.0) return 1 - erf_series(z);
  return erfc_cf(z);
}

// composite Simpson on [a, b] with n panels (n even)
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    s += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  }
  return s * h / 3;
}

// the bound quadrature by brute-force trapezoid in the tau domain
inline double trapezoid_z(double tau0, double tau_f, long n = 1000000) {
  const double h = tau_f / n;
  double sum = 0;
  for (long i = 0; i <= n; ++i) {
    const double tau = i * h;
    const double v = tau * std::erfc(tau / tau0) * (1 - std::sqrt(tau / tau_f));
    sum += (i == 0 || i == n) ? v / 2 : v;
  }
  return 0.5 * sum * h;
}

// chord constant from the original system sin(phi) = (1 - cos(phi))/phi,
// bisected directly (the library solves the reduced tan form instead)
inline double phi_oracle() {
  const auto g = [](double p) { return std::sin(p) - (1 - std::cos(p)) / p; };
  double lo = 2.0, hi = 2.6;  // g(2.0) > 0, g(2.6) < 0
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = (lo + hi) / 2;
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

// brute-force min-density overlap for K = 1
inline double grid_min_overlap_1d(double var, double shift, int n = 400001) {
  const double sd = std::sqrt(var);
  const double lo = -12 * sd - std::abs(shift);
  const double hi = 12 * sd + std::abs(shift);
  const auto pdf = [&](double x) {
    return std::exp(-x * x / (2 * var)) / (sd * std::sqrt(2 * M_PI));
  };
  return simpson([&](double x) { return std::min(pdf(x), pdf(x - shift)); }, lo, hi, n);
}

// brute-force min-density overlap for K = 2 (midpoint rule on a wide box)
inline double grid_min_overlap_2d(const Eigen::Matrix2d& sigma, const Eigen::Vector2d& shift,
                                  int n = 700) {
  const Eigen::Matrix2d inv = sigma.inverse();
  const double norm = 1.0 / (2 * M_PI * std::sqrt(sigma.determinant()));
  const auto pdf = [&](const Eigen::Vector2d& x) {
    return norm * std::exp(-0.5 * x.dot(inv * x));
  };
  const double extent = 9 * std::sqrt(sigma.diagonal().maxCoeff()) + shift.norm();
  const double h = 2 * extent / n;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::Vector2d x(-extent + (i + 0.5) * h, -extent + (j + 0.5) * h);
      sum += std::min(pdf(x), pdf(x - shift));
    }
  }
  return sum * h * h;
}

// deterministic random helpers
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int k, double jitter = 0.5) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a(i, j) = gauss(rng);
  }
  return a * a.transpose() + jitter * k * Eigen::MatrixXd::Identity(k, k);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v[i] = gauss(rng);
  return v;
}

inline Eigen::VectorXd random_probabilities(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = uni(rng);
  return p / p.sum();
}

}  // namespace oracles
