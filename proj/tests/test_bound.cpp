#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "qbzzb/bound.hpp"
#include "qbzzb/oracle.hpp"

using qbzzb::BoundResult;
using qbzzb::Direction;
using qbzzb::directional_bound;
using qbzzb::GaussianPrior;
using qbzzb::parameter_bound;
using qbzzb::ProbeSpectrum;
using qbzzb::Regime;
using qbzzb::scan;
using qbzzb::weighted_photon_upper;
using qbzzb::z_integral;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ProbeSpectrum<double> two_point_01() {
  Eigen::MatrixXd m(2, 1);
  m << 0, 1;
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  return {m, p};
}

ProbeSpectrum<double> deterministic_spectrum(int k) {
  Eigen::MatrixXd m(1, k);
  for (int j = 0; j < k; ++j) m(0, j) = 2.0 + j;
  return {m, Eigen::VectorXd::Ones(1)};
}

}  // namespace

TEST_CASE("z_integral closed form at infinite resource time") {
  CHECK(z_integral(1.0, kInf) == 0.125);
  CHECK(z_integral(3.0, kInf) == doctest::Approx(9.0 / 8).epsilon(1e-15));
}

TEST_CASE("z_integral analytic limits") {
  // deep Heisenberg side: Z -> tau_f^2 / 20
  const double z_h = z_integral(1e4, 1.0, 1e-10);
  CHECK(std::abs(z_h / 0.05 - 1) < 0.005);
  CHECK(z_h == doctest::Approx(0.0499973133836).epsilon(1e-8));

  // prior side at ratio 1e-4: exact value reflects the O(sqrt(ratio)) approach
  const double z_p = z_integral(1.0, 1e4, 1e-10);
  CHECK(z_p == doctest::Approx(0.12396294886).epsilon(1e-8));
  CHECK(z_p < 0.125);
}

TEST_CASE("z_integral agrees with a brute-force trapezoid oracle") {
  const double z11 = z_integral(1.0, 1.0, 1e-10);
  CHECK(z11 == doctest::Approx(0.026085168338559).epsilon(1e-10));
  CHECK(z11 == doctest::Approx(oracles::trapezoid_z(1.0, 1.0)).epsilon(1e-6));
  CHECK(z11 > 0.0);
  CHECK(z11 < 0.05);

  for (double ratio : {0.03, 0.3, 3.0, 30.0}) {
    const double tau_f = 1.0 / ratio;
    CHECK(z_integral(1.0, tau_f, 1e-10) ==
          doctest::Approx(oracles::trapezoid_z(1.0, tau_f)).epsilon(1e-6));
  }
}

TEST_CASE("z_integral argument validation") {
  CHECK_THROWS_AS(z_integral(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(z_integral(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(z_integral(1.0, -2.0), std::domain_error);
  CHECK_THROWS_AS(z_integral(1.0, 1.0, 1e-15), std::domain_error);
  CHECK_THROWS_AS(z_integral(1.0, 1.0, 0.5), std::domain_error);
}

TEST_CASE("z_integral is monotone in both arguments and below both limits") {
  double prev = 0;
  for (double t0 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double z = z_integral(t0, 1.0, 1e-10);
    CHECK(z > prev);
    prev = z;
    CHECK(z <= t0 * t0 / 8 + 1e-12);
    CHECK(z <= 1.0 / 20 + 1e-12);
  }
  prev = 0;
  for (double tf : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double z = z_integral(1.0, tf, 1e-10);
    CHECK(z > prev);
    prev = z;
    CHECK(z <= 1.0 / 8 + 1e-12);
    CHECK(z <= tf * tf / 20 + 1e-12);
  }
}

TEST_CASE("z_integral approaches its envelopes at extreme ratios") {
  // Heisenberg side closes to 1% by ratio 1e2; the prior side approaches as
  // ~0.83*sqrt(ratio) and needs ratio 1e-4 for the same closeness.
  CHECK(std::abs(z_integral(1e2, 1.0, 1e-10) / 0.05 - 1) < 0.01);
  CHECK(std::abs(z_integral(1.0, 1e4, 1e-10) / 0.125 - 1) < 0.01);
}

TEST_CASE("directional_bound with a deterministic spectrum returns the prior limit") {
  Eigen::MatrixXd s(1, 1);
  s << 0.49;
  const auto prior = GaussianPrior<double>::zero_mean(s);
  const auto br = directional_bound(prior, deterministic_spectrum(1),
                                    Direction<double>(Eigen::VectorXd::Ones(1)));
  CHECK(br.z == 0.49);
  CHECK(br.prior_limit == 0.49);
  CHECK(std::isinf(br.tau_f));
  CHECK(std::isinf(br.asymptotic_limit));
  CHECK(br.regime == Regime::kPriorDominated);
  CHECK(br.tau0 == doctest::Approx(2 * std::sqrt(2 * 0.49)).epsilon(1e-15));
}

TEST_CASE("directional_bound reduces to the single-parameter chain for diagonal priors") {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
  sigma(0, 0) = 0.25;
  sigma(1, 1) = 4.0;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);

  Eigen::MatrixXd m(4, 2);
  m << 0, 0, 1, 2, 2, 1, 3, 3;
  Eigen::VectorXd p(4);
  p << 0.4, 0.3, 0.2, 0.1;
  const ProbeSpectrum<double> spec(m, p);

  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e[k] = 1;
    const auto br = directional_bound(prior, spec, Direction<double>(e));
    // independent single-parameter chain: tau0 = 2 sqrt(2 sigma_kk), resource
    // is the marginal deviation of n_k
    const auto rs = qbzzb::h_plus(spec, e);
    CHECK(br.tau0 == doctest::Approx(2 * std::sqrt(2 * sigma(k, k))).epsilon(1e-14));
    CHECK(br.tau_f == doctest::Approx(rs.tau_f).epsilon(1e-14));
    CHECK(br.z == doctest::Approx(z_integral(br.tau0, rs.tau_f, 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("directional_bound correlated-prior hand example") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2, 1, 1, 2;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);
  Eigen::MatrixXd m(2, 2);
  m << 0, 0, 1, 1;
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  const ProbeSpectrum<double> spec(m, p);
  Eigen::VectorXd u(2);
  u << 1, 0;

  const auto br = directional_bound(prior, spec, Direction<double>(u));
  // v0 = (2n1 + n2)/2 projection: support {0, 1.5}, lower median 0, so the
  // deviation is 0.75
  const double lam = qbzzb::lambda_constant<double>().lambda;
  CHECK(br.tau0 == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(br.tau_f == doctest::Approx(1.0 / (2 * lam * 0.75)).epsilon(1e-13));
  CHECK(br.prior_limit == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(br.z == doctest::Approx(z_integral(4.0, br.tau_f, 1e-8)).epsilon(1e-12));
}

TEST_CASE("BoundResult invariants hold across random instances") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 4);
    const auto prior = GaussianPrior<double>::zero_mean(oracles::random_spd(rng, k));
    Eigen::MatrixXd m(6, k);
    std::uniform_real_distribution<double> uni(0.0, 4.0);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < k; ++j) m(i, j) = uni(rng);
    }
    const ProbeSpectrum<double> spec(m, oracles::random_probabilities(rng, 6));
    const Eigen::VectorXd uvec = oracles::random_vector(rng, k);
    if (uvec.norm() < 1e-6) continue;
    const auto br = directional_bound(prior, spec, Direction<double>(uvec));

    CHECK(br.z <= br.prior_limit + 1e-12);
    CHECK(br.z <= br.asymptotic_limit + 1e-12);
    CHECK(br.prior_limit == doctest::Approx(br.tau0 * br.tau0 / 8).epsilon(1e-9));
    if (!std::isinf(br.tau_f)) {
      CHECK(br.asymptotic_limit == doctest::Approx(br.tau_f * br.tau_f / 20).epsilon(1e-14));
    }
  }
}

TEST_CASE("directional_bound scale covariance") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2, 1, 1, 2;
  Eigen::MatrixXd m(3, 2);
  m << 0, 0, 1, 2, 3, 1;
  Eigen::VectorXd p(3);
  p << 0.5, 0.25, 0.25;
  Eigen::VectorXd u(2);
  u << 1, -0.5;

  const double c = 3.7;
  const auto base = directional_bound(GaussianPrior<double>::zero_mean(sigma),
                                      ProbeSpectrum<double>(m, p), Direction<double>(u),
                                      std::nullopt, 1e-10);
  const auto scaled = directional_bound(
      GaussianPrior<double>::zero_mean((c * c * sigma).eval()),
      ProbeSpectrum<double>((m / c).eval(), p), Direction<double>(u), std::nullopt, 1e-10);
  CHECK(scaled.z == doctest::Approx(c * c * base.z).epsilon(1e-9));
  CHECK(scaled.tau0 == doctest::Approx(c * base.tau0).epsilon(1e-12));
  CHECK(scaled.tau_f == doctest::Approx(c * base.tau_f).epsilon(1e-12));
}

TEST_CASE("regime classification by tau0/tau_f ratio") {
  // two-point spectrum pins tau_f = 1/lambda; sigma sets tau0 = 2 sqrt(2) sigma
  const auto spec = two_point_01();
  const auto classify = [&](double sigma_sq) {
    Eigen::MatrixXd s(1, 1);
    s << sigma_sq;
    return directional_bound(GaussianPrior<double>::zero_mean(s), spec,
                             Direction<double>(Eigen::VectorXd::Ones(1)))
        .regime;
  };
  CHECK(classify(1e-6) == Regime::kPriorDominated);
  CHECK(classify(1.0) == Regime::kIntermediate);
  CHECK(classify(1e4) == Regime::kHeisenberg);
}

TEST_CASE("parameter_bound") {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2) * 0.04;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 2, 0;
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  const ProbeSpectrum<double> spec(m, p);

  const auto pb = parameter_bound(prior, spec, 0);
  Eigen::VectorXd e0(2);
  e0 << 1, 0;
  const auto db = directional_bound(prior, spec, Direction<double>(e0));
  CHECK(pb.z == db.z);
  CHECK(pb.tau_f == db.tau_f);

  // asymptote equals 1/(80 lambda^2 H+^2)
  const auto rs = qbzzb::h_plus(spec, e0);
  const double lam = qbzzb::lambda_constant<double>().lambda;
  CHECK(pb.asymptotic_limit ==
        doctest::Approx(1.0 / (80 * lam * lam * rs.h_plus * rs.h_plus)).epsilon(1e-10));

  CHECK_THROWS_AS(parameter_bound(prior, spec, 2), std::out_of_range);
  CHECK_THROWS_AS(parameter_bound(prior, spec, -1), std::out_of_range);

  // K = 1 parameter bound is the directional bound at u = [1]
  Eigen::MatrixXd s1(1, 1);
  s1 << 0.09;
  const auto p1 = GaussianPrior<double>::zero_mean(s1);
  const auto spec1 = two_point_01();
  CHECK(parameter_bound(p1, spec1, 0).z ==
        directional_bound(p1, spec1, Direction<double>(Eigen::VectorXd::Ones(1))).z);
}

TEST_CASE("weighted_photon_upper") {
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
  diag(0, 0) = 3;
  diag(1, 1) = 5;
  const auto prior_diag = GaussianPrior<double>::zero_mean(diag);
  Eigen::VectorXd n(2);
  n << 7, 11;
  CHECK(weighted_photon_upper(prior_diag, n, 0) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(weighted_photon_upper(prior_diag, n, 1) == doctest::Approx(11.0).epsilon(1e-15));

  Eigen::MatrixXd sigma(2, 2);
  sigma << 2, 1, 1, 2;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);
  Eigen::VectorXd photons(2);
  photons << 3, 5;
  CHECK(weighted_photon_upper(prior, photons, 0) == doctest::Approx(5.5).epsilon(1e-15));

  CHECK(weighted_photon_upper(prior, Eigen::VectorXd::Zero(2), 0) == 0.0);
  Eigen::VectorXd negative(2);
  negative << -1, 2;
  CHECK_THROWS_AS(weighted_photon_upper(prior, negative, 0), std::domain_error);
  CHECK_THROWS_AS(weighted_photon_upper(prior, photons, 5), std::out_of_range);
}

TEST_CASE("bzzb_generic with an uninformative pe saturates the prior limit") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2, 1, 1, 2;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);
  Eigen::VectorXd uvec(2);
  uvec << 1, 0;
  const Direction<double> u(uvec);
  const Eigen::VectorXd v0 = qbzzb::v_zero(prior, u);
  const double value = qbzzb::bzzb_generic(
      prior, [](double, const Eigen::VectorXd&) { return 0.5; }, u, v0, 1e-10);
  CHECK(value == doctest::Approx(uvec.dot(sigma * uvec)).epsilon(1e-9));
}

TEST_CASE("bzzb_generic reproduces the assembled quantum bound") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2, 1, 1, 2;
  const auto prior = GaussianPrior<double>::zero_mean(sigma);
  Eigen::MatrixXd m(2, 2);
  m << 0, 0, 1, 1;
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  const ProbeSpectrum<double> spec(m, p);
  Eigen::VectorXd uvec(2);
  uvec << 1, 0;
  const Direction<double> u(uvec);

  const Eigen::VectorXd v0 = qbzzb::v_zero(prior, u);
  const auto rs = qbzzb::h_plus(spec, v0);
  const auto chain = [&rs](double tau, const Eigen::VectorXd&) {
    return qbzzb::pe_lb_quantum(qbzzb::fidelity_lb_truncated(rs, tau));
  };
  const double via_generic = qbzzb::bzzb_generic(prior, chain, u, v0, 1e-10);
  const auto br = directional_bound(prior, spec, u, std::nullopt, 1e-10);
  CHECK(via_generic == doctest::Approx(br.z).epsilon(1e-8));
}

TEST_CASE("bzzb_generic contract checks") {
  const auto prior = GaussianPrior<double>::zero_mean(Eigen::MatrixXd::Identity(1, 1));
  const Direction<double> u(Eigen::VectorXd::Ones(1));
  const Eigen::VectorXd v_bad = 2 * Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(qbzzb::bzzb_generic(
                      prior, [](double, const Eigen::VectorXd&) { return 0.5; }, u, v_bad),
                  std::invalid_argument);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(qbzzb::bzzb_generic(
                      prior, [](double, const Eigen::VectorXd&) { return 0.7; }, u, v),
                  std::domain_error);
  CHECK_THROWS_AS(qbzzb::bzzb_generic(
                      prior, [](double, const Eigen::VectorXd&) { return -0.1; }, u, v),
                  std::domain_error);
}

TEST_CASE("pe chain identity: helstrom of truncated fidelity is the Z kernel") {
  // 1/2 (1 - sqrt(tau/tau_f)) for tau < tau_f, 0 beyond
  qbzzb::ResourceSummary<double> rs{0.5, 0.0, 2.0};
  for (double tau = 0; tau < 4; tau += 0.1) {
    const double lhs = qbzzb::pe_lb_quantum(qbzzb::fidelity_lb_truncated(rs, tau));
    const double rhs =
        tau < rs.tau_f ? 0.5 * (1 - std::sqrt(tau / rs.tau_f)) : 0.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
  }
}

TEST_CASE("scan rows and endpoint values") {
  const auto rows = scan<double>({1e-3, 1.0, 1e3}, 1e-10);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ratio == 1e-3);
  CHECK(rows[0].z_over_tau02 == doctest::Approx(0.1217205568).epsilon(1e-7));
  CHECK(rows[1].z_over_tau02 == doctest::Approx(0.026085168339).epsilon(1e-8));
  CHECK(rows[2].z_over_tauf2 == doctest::Approx(0.0499731338).epsilon(1e-7));
  for (const auto& r : rows) {
    CHECK(r.prior_limit_norm == 0.125);
    CHECK(r.asymptotic_limit_norm == 0.05);
    CHECK(r.z_over_tau02 <= 0.125 + 1e-12);
    CHECK(r.z_over_tauf2 <= 0.05 + 1e-12);
  }
  CHECK_THROWS_AS(scan<double>({-1.0}), std::domain_error);
  CHECK_THROWS_AS(scan<double>({0.0}), std::domain_error);
}
