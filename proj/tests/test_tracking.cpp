#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "covertsim/tracking.hpp"

#include <cmath>

using namespace covertsim;

namespace {

Vec6 random_state(RandomStream& rng) {
  Vec6 a;
  a << rng.uniform(200.0, 1500.0), rng.uniform(-400.0, 400.0), rng.uniform(60.0, 400.0),
      rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), rng.uniform(-10.0, 10.0);
  return a;
}

}  // namespace

TEST_CASE("constant-velocity prediction") {
  TrackState s;
  s.alpha << 0, 0, 100, 30, 0, 0;
  s.cov = Mat6::Identity();

  const TrackState p = predict(s, 0.2, Mat6::Zero());
  CHECK(p.alpha(0) == doctest::Approx(6.0));
  CHECK(p.alpha(1) == doctest::Approx(0.0));
  CHECK(p.alpha(2) == doctest::Approx(100.0));
  CHECK((p.alpha.tail<3>() - s.alpha.tail<3>()).norm() == 0.0);

  const TrackState frozen = predict(s, 0.0, Mat6::Zero());
  CHECK((frozen.alpha - s.alpha).norm() == 0.0);
  CHECK((frozen.cov - s.cov).norm() == 0.0);

  const TrackState one = predict(s, 1.0, Mat6::Zero());
  Mat6 want = Mat6::Zero();
  want.topLeftCorner<3, 3>() = 2.0 * Eigen::Matrix3d::Identity();
  want.topRightCorner<3, 3>() = Eigen::Matrix3d::Identity();
  want.bottomLeftCorner<3, 3>() = Eigen::Matrix3d::Identity();
  want.bottomRightCorner<3, 3>() = Eigen::Matrix3d::Identity();
  CHECK((one.cov - want).norm() < 1e-12);
}

TEST_CASE("measurement model anchors") {
  const Vec3 radar(0, 0, 0);
  Vec6 a = Vec6::Zero();
  a.head<3>() << 1500.0, 0.0, 0.0;

  const MeasurementVector b = measurement_fn(a, radar);
  CHECK(b(0) == doctest::Approx(2.0 * 1500.0 / 299792458.0).epsilon(1e-12));
  CHECK(b(0) == doctest::Approx(1.0007e-5).epsilon(1e-3));
  CHECK(b(1) == 0.0);
  CHECK(b(2) == doctest::Approx(0.0));  // broadside
  CHECK(b(3) == doctest::Approx(1.0));

  // velocity orthogonal to the line of sight
  a.tail<3>() << 0.0, 25.0, 0.0;
  CHECK(measurement_fn(a, radar)(1) == doctest::Approx(0.0));

  Vec6 at_radar = Vec6::Zero();
  CHECK_THROWS_AS(measurement_fn(at_radar, radar), std::invalid_argument);
}

TEST_CASE("jacobian matches analytic slope and finite differences") {
  const Vec3 radar(0, 0, 30);
  RandomStream rng(57);

  Vec6 a = random_state(rng);
  const Mat56 g = jacobian(a, radar);
  const double d = (a.head<3>() - radar).norm();
  CHECK(g(0, 0) == doctest::Approx(2.0 * (a(0) - radar(0)) / (299792458.0 * d)).epsilon(1e-12));
  // angle rows do not depend on velocity
  CHECK(g.block<3, 3>(2, 3).norm() == 0.0);

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec6 s = random_state(rng);
    const Mat56 ja = jacobian(s, radar);
    Mat56 fd;
    for (int k = 0; k < 6; ++k) {
      const double h = std::max(1e-4 * std::abs(s(k)), 1e-6);
      Vec6 up = s, dn = s;
      up(k) += h;
      dn(k) -= h;
      fd.col(k) = (measurement_fn(up, radar) - measurement_fn(dn, radar)) / (2.0 * h);
    }
    const double rel = (ja - fd).norm() / (1.0 + ja.norm());
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("measurement covariance shape") {
  MeasurementNoiseModel m;
  m.a1 = 2.0;
  m.a2 = 3.0;
  m.a3 = 4.0;
  m.a4 = 5.0;
  m.reg_epsilon = 0.0;

  const Mat5 q = measurement_cov(1.0, 0.0, 1.0, 0.8, m);
  CHECK(q(2, 2) == doctest::Approx(4.0));
  CHECK(q(3, 3) == doctest::Approx(0.0));
  CHECK(q(2, 3) == doctest::Approx(0.0));

  // azimuth block is singular for every angle without loading
  for (double th : {0.1, 0.7, 1.2}) {
    const Mat5 qa = measurement_cov(2.5, std::sin(th), std::cos(th), 0.5, m);
    const double det = qa(2, 2) * qa(3, 3) - qa(2, 3) * qa(3, 2);
    const double scale = std::pow(m.a3 / 2.5, 2);
    CHECK(std::abs(det) < 1e-13 * scale);
  }

  m.reg_epsilon = 1e-6;
  const Mat5 q1 = measurement_cov(1.0, 0.3, std::sqrt(1 - 0.09), 0.5, m);
  const Mat5 q2 = measurement_cov(2.0, 0.3, std::sqrt(1 - 0.09), 0.5, m);
  CHECK((q1 - 2.0 * q2).norm() < 1e-15);
  CHECK(Eigen::LLT<Mat5>(q1).info() == Eigen::Success);
}

TEST_CASE("kalman update behaviour") {
  const Vec3 radar(0, 0, 0);
  RandomStream rng(91);
  MeasurementNoiseModel m;
  m.a1 = 1e-14;
  m.a2 = 1e-3;
  m.a3 = 1e-6;
  m.a4 = 1e-6;

  TrackState pred;
  pred.alpha = random_state(rng);
  pred.cov = Mat6::Identity() * 4.0;

  const Mat56 g = jacobian(pred.alpha, radar);
  const MeasurementVector bp = measurement_fn(pred.alpha, radar);
  const LookAngles ang = look_angles(radar, pred.alpha.head<3>());
  const Mat5 qb = measurement_cov(1e-4, ang, m);

  // zero innovation: state unchanged, information never decreases
  const UpdateResult r0 = update(pred, bp, bp, g, qb);
  CHECK((r0.state.alpha - pred.alpha).norm() < 1e-9);
  CHECK(r0.state.cov.trace() <= pred.cov.trace() + 1e-12);

  // uninformative measurement: posterior stays at the prior
  const UpdateResult r1 = update(pred, bp, bp, g, Mat5(qb * 1e12));
  CHECK((r1.state.cov - pred.cov).norm() < 1e-4 * pred.cov.norm());

  // scalar sanity case embedded in the 5x6 shapes
  TrackState sp;
  sp.alpha = Vec6::Zero();
  sp.cov = Mat6::Identity();
  Mat56 gs = Mat56::Zero();
  gs(0, 0) = 1.0;
  MeasurementVector beta = MeasurementVector::Zero();
  beta(0) = 1.0;
  const UpdateResult rs = update(sp, beta, MeasurementVector::Zero(), gs, Mat5::Identity());
  CHECK(rs.state.alpha(0) == doctest::Approx(0.5));
  CHECK(rs.state.cov(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("information-form posterior equals the covariance-form update") {
  const Vec3 radar(0, 0, 30);
  RandomStream rng(101);
  MeasurementNoiseModel m;
  m.a1 = 4.45e-17;
  m.a2 = 0.25;
  m.a3 = 7.6e-7;
  m.a4 = 7.6e-7;

  for (int trial = 0; trial < 25; ++trial) {
    TrackState pred;
    pred.alpha = random_state(rng);
    Eigen::Matrix<double, 6, 6> rnd;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) rnd(i, j) = rng.gauss();
    pred.cov = rnd * rnd.transpose() + 0.5 * Mat6::Identity();

    const Mat56 g = jacobian(pred.alpha, radar);
    const LookAngles ang = look_angles(radar, pred.alpha.head<3>());
    const Mat5 qb = measurement_cov(rng.uniform(1e-6, 1e-3), ang, m);

    const MeasurementVector bp = measurement_fn(pred.alpha, radar);
    const UpdateResult u = update(pred, bp, bp, g, qb);
    const Mat6 info = predicted_posterior_cov(pred.cov.inverse(), g, qb);
    CHECK((u.state.cov - info).norm() <= 1e-8 * info.norm());
  }

  // zero information added keeps the prior
  TrackState pred;
  pred.alpha = random_state(rng);
  pred.cov = 2.0 * Mat6::Identity();
  const Mat56 g = jacobian(pred.alpha, radar);
  const Mat6 same = predicted_posterior_cov(pred.cov.inverse(), g, Mat5(Mat5::Identity() * 1e18));
  CHECK((same - pred.cov).norm() < 1e-6 * pred.cov.norm());
}

TEST_CASE("information term factors the echo snr out of the posterior") {
  const Vec3 radar(0, 0, 30);
  RandomStream rng(111);
  MeasurementNoiseModel m;
  m.a1 = 4.45e-17;
  m.a2 = 0.25;
  m.a3 = 7.6e-7;
  m.a4 = 7.6e-7;

  const Vec6 a = random_state(rng);
  const double fc = 6e9, gmf = 1000.0, noise = 1e-12;
  const InformationTerm t = mse_information_term(a, radar, m, fc, gmf, noise);

  // J equals G' Qb^-1 G / gamma for any positive gamma
  const LookAngles ang = look_angles(radar, a.head<3>());
  const Mat56 g = jacobian(a, radar);
  for (double gamma : {1e-5, 3.7e-4, 2.0}) {
    const Mat5 qb = measurement_cov(gamma, ang, m);
    const Mat6 ref = g.transpose() * qb.inverse() * g / gamma;
    CHECK((t.j - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
  }

  // isotropic radar covariance: gamma_r = coeff * P_R (||a_r||^2 = N_T)
  ArrayGeometry geom;
  const CVec ar = steer_upa(ang, geom);
  const double pr = 10.0;
  const CMat q_iso = (pr / geom.radar_antennas()) *
                     CMat::Identity(geom.radar_antennas(), geom.radar_antennas());
  const double gamma_iso = t.gamma_coeff * (ar.adjoint() * q_iso * ar)(0, 0).real();
  const double rho0 = rho0_reference(fc);
  const double want = rho0 * rho0 / std::pow(ang.distance, 4) * gmf * pr / noise;
  CHECK(gamma_iso == doctest::Approx(want).epsilon(1e-9));
}
