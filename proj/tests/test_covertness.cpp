#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "covertsim/covertness.hpp"
#include "covertsim/rng.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace covertsim;

TEST_CASE("lambdas from the channel quadratic forms") {
  RandomStream rng(3);
  const int m = 6, nt = 16;
  CVec w(m), h_aw(m), h_rw(nt);
  for (int i = 0; i < m; ++i) w(i) = rng.cgauss();
  for (int i = 0; i < m; ++i) h_aw(i) = rng.cgauss();
  for (int i = 0; i < nt; ++i) h_rw(i) = rng.cgauss();
  CMat q = CMat::Zero(nt, nt);

  auto [l0a, l1a] = lambdas(CVec::Zero(m), q, h_aw, h_rw, 1e-12);
  CHECK(l0a == doctest::Approx(1e-12));
  CHECK(l1a == doctest::Approx(l0a));

  // h_rw as an eigenvector of Q with eigenvalue p
  const double p = 0.37;
  q = p * CMat::Identity(nt, nt);
  auto [l0b, l1b] = lambdas(w, q, h_aw, h_rw, 1e-12);
  CHECK(l0b == doctest::Approx(p * h_rw.squaredNorm() + 1e-12).epsilon(1e-12));
  CHECK(l1b - l0b == doctest::Approx(std::norm(h_aw.dot(w))).epsilon(1e-12));
}

TEST_CASE("closed-form detection example: l0 = 1, l1 = 2") {
  auto [d01, d10] = kl_divergences(1.0, 2.0);
  CHECK(d01 == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-12));
  CHECK(d10 == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-12));

  CHECK(detection_threshold(1.0, 2.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  const ErrorProbabilities e = error_probabilities(1.0, 2.0);
  CHECK(e.p_fa == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(e.p_md == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.xi == doctest::Approx(0.75).epsilon(1e-12));

  // Pinsker: xi >= 1 - sqrt(d01 / 2)
  CHECK(e.xi >= 1.0 - std::sqrt(d01 / 2.0));
  CHECK(1.0 - std::sqrt(d01 / 2.0) == doctest::Approx(0.689).epsilon(1e-2));
}

TEST_CASE("threshold limit and homogeneity") {
  CHECK(detection_threshold(3.0, 3.0) == doctest::Approx(3.0));
  const double eta = detection_threshold(1.0, 1.7);
  CHECK(detection_threshold(5.0, 8.5) == doctest::Approx(5.0 * eta).epsilon(1e-12));
  CHECK(error_probabilities(2.0, 2.0).xi == doctest::Approx(1.0));
}

TEST_CASE("kl divergences are scale invariant and ordered") {
  RandomStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const double l0 = rng.uniform(1e-12, 2.0);
    const double r = 1.0 + rng.uniform01() * 99.0;
    auto [a01, a10] = kl_divergences(l0, l0 * r);
    auto [b01, b10] = kl_divergences(7.3 * l0, 7.3 * l0 * r);
    CHECK(a01 == doctest::Approx(b01).epsilon(1e-10));
    CHECK(a10 == doctest::Approx(b10).epsilon(1e-10));
    CHECK(a01 <= a10 + 1e-15);  // D(p0||p1) <= D(p1||p0) when l1 >= l0
  }
}

TEST_CASE("xi equals one minus the total variation distance") {
  RandomStream rng(7);
  for (int i = 0; i < 400; ++i) {
    const double l0 = std::pow(10.0, rng.uniform(-12.0, 0.0));
    const double l1 = l0 * (1.0 + std::pow(10.0, rng.uniform(-6.0, 2.0)));
    const ErrorProbabilities e = error_probabilities(l0, l1);
    const double vt = oracle::total_variation_numeric(l0, l1);
    CHECK(std::abs(e.xi - (1.0 - vt)) <= 2e-6);

    auto [d01, d10] = kl_divergences(l0, l1);
    CHECK(vt <= std::sqrt(d01 / 2.0) + 1e-9);
    CHECK(vt <= std::sqrt(d10 / 2.0) + 1e-9);
  }
}

TEST_CASE("covert roots") {
  auto [z1, z2] = covert_roots(0.0);
  CHECK(z1 == doctest::Approx(1.0));
  CHECK(z2 == doctest::Approx(1.0));

  auto [x1, x2] = covert_roots(0.1);
  CHECK(x1 == doctest::Approx(0.8240).epsilon(2e-3));
  CHECK(x2 == doctest::Approx(1.2299).epsilon(2e-3));

  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    auto [a, b] = covert_roots(eps);
    const double fa = std::log(a) + 1.0 / a - 1.0;
    const double fb = std::log(b) + 1.0 / b - 1.0;
    CHECK(std::abs(fa - 2.0 * eps * eps) < 1e-10);
    CHECK(std::abs(fb - 2.0 * eps * eps) < 1e-10);
  }

  auto [s1, s2] = covert_roots(0.05);
  auto [w1, w2] = covert_roots(0.2);
  CHECK(w1 < s1);
  CHECK(w2 > s2);
}

TEST_CASE("achievable rate anchors") {
  RandomStream rng(11);
  const int m = 6, nt = 16;
  CVec h_ab(m), h_rb(nt);
  for (int i = 0; i < m; ++i) h_ab(i) = rng.cgauss();
  for (int i = 0; i < nt; ++i) h_rb(i) = rng.cgauss();
  const CMat q0 = CMat::Zero(nt, nt);

  CHECK(achievable_rate(CVec::Zero(m), q0, h_ab, h_rb, 1e-12) == doctest::Approx(0.0));

  // unit SINR gives one bit: |h_ab^H w|^2 = 1e-12 = sigma_b^2
  const CVec w = h_ab / h_ab.squaredNorm() * 1e-6;
  CHECK(achievable_rate(w, q0, h_ab, h_rb, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));

  const CMat q1 = 1e-13 * CMat::Identity(nt, nt);
  const CMat q2 = 2.0 * q1;
  CHECK(achievable_rate(w, q2, h_ab, h_rb, 1e-12) < achievable_rate(w, q1, h_ab, h_rb, 1e-12));
}

TEST_CASE("radar snr anchors") {
  ArrayGeometry g;
  const CVec ar = steer_upa(0.4, 1.1, g);
  const int nt = g.radar_antennas();
  const double fc = 6e9, gmf = 1000.0, noise = 1e-12, d = 1000.0, pr = 10.0;
  const double rho0 = rho0_reference(fc);
  const double coeff = rho0 * rho0 / std::pow(d, 4) * gmf / noise;

  CHECK(radar_snr(CMat::Zero(nt, nt), d, ar, fc, gmf, noise) == doctest::Approx(0.0));
  CHECK(radar_snr(CMat(pr / nt * CMat::Identity(nt, nt)), d, ar, fc, gmf, noise) ==
        doctest::Approx(coeff * pr).epsilon(1e-12));
  const CMat beamed = pr / nt * (ar * ar.adjoint());
  CHECK(radar_snr(beamed, d, ar, fc, gmf, noise) == doctest::Approx(coeff * pr * nt).epsilon(1e-12));
}
