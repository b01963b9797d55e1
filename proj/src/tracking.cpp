#include "covertsim/tracking.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace covertsim {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

Mat6 transition_matrix(double dt) {
  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
  return f;
}

Mat6 process_noise(double accel_sigma, double dt) {
  const double s2 = accel_sigma * accel_sigma;
  Mat6 q = Mat6::Zero();
  const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
  q.topLeftCorner<3, 3>() = s2 * std::pow(dt, 4) / 4.0 * i3;
  q.topRightCorner<3, 3>() = s2 * std::pow(dt, 3) / 2.0 * i3;
  q.bottomLeftCorner<3, 3>() = q.topRightCorner<3, 3>();
  q.bottomRightCorner<3, 3>() = s2 * dt * dt * i3;
  return q;
}

TrackState predict(const TrackState& s, double dt, const Mat6& q_alpha) {
  const Mat6 f = transition_matrix(dt);
  TrackState out;
  out.alpha = f * s.alpha;
  out.cov = f * s.cov * f.transpose() + q_alpha;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.slot = s.slot;
  return out;
}

MeasurementVector measurement_fn(const Vec6& alpha, const Vec3& radar_pos) {
  const Vec3 p = alpha.head<3>() - radar_pos;
  const double d = p.norm();
  if (!(d > 0.0)) throw std::invalid_argument("singular geometry: target at the radar");
  const double dh = std::hypot(p.x(), p.y());

  MeasurementVector beta;
  beta(0) = 2.0 * d / kSpeedOfLight;
  beta(1) = p.dot(alpha.tail<3>()) / d;
  if (dh > 0.0) {
    beta(2) = p.y() / dh;
    beta(3) = p.x() / dh;
  } else {
    beta(2) = 0.0;
    beta(3) = 1.0;
  }
  beta(4) = dh / d;
  return beta;
}

Mat56 jacobian(const Vec6& alpha, const Vec3& radar_pos) {
  const Vec3 p = alpha.head<3>() - radar_pos;
  const Vec3 v = alpha.tail<3>();
  const double d = p.norm();
  const double dh = std::hypot(p.x(), p.y());
  if (!(d > 0.0) || !(dh > 0.0))
    throw std::invalid_argument("singular geometry for the measurement Jacobian");

  Mat56 g = Mat56::Zero();
  // two-way delay
  g.block<1, 3>(0, 0) = 2.0 / (kSpeedOfLight * d) * p.transpose();
  // radial speed
  g.block<1, 3>(1, 0) = (v / d - p * (p.dot(v)) / (d * d * d)).transpose();
  g.block<1, 3>(1, 3) = (p / d).transpose();
  // sin(theta), cos(theta)
  const double dh3 = dh * dh * dh;
  g(2, 0) = -p.x() * p.y() / dh3;
  g(2, 1) = p.x() * p.x() / dh3;
  g(3, 0) = p.y() * p.y() / dh3;
  g(3, 1) = -p.x() * p.y() / dh3;
  // sin(phi)
  const double d3 = d * d * d;
  g(4, 0) = p.x() * p.z() * p.z() / (dh * d3);
  g(4, 1) = p.y() * p.z() * p.z() / (dh * d3);
  g(4, 2) = -dh * p.z() / d3;
  return g;
}

Mat5 measurement_cov(double gamma_r, double sin_theta, double cos_theta, double cos_phi,
                     const MeasurementNoiseModel& m) {
  if (!(gamma_r > 0.0)) throw std::invalid_argument("echo SNR must be positive");
  Mat5 q = Mat5::Zero();
  q(0, 0) = m.a1;
  q(1, 1) = m.a2;
  q(2, 2) = m.a3 * cos_theta * cos_theta;
  q(3, 3) = m.a3 * sin_theta * sin_theta;
  q(2, 3) = q(3, 2) = -m.a3 * sin_theta * cos_theta;
  q(4, 4) = m.a4 * cos_phi * cos_phi;
  // diagonal loading scaled per component: the entries mix units (s^2,
  // (m/s)^2, dimensionless), so a common a3-sized load would swamp the
  // delay row while the azimuth block still needs it to become invertible
  Mat5 load = Mat5::Zero();
  load.diagonal() << m.a1, m.a2, m.a3, m.a3, m.a4;
  q += m.reg_epsilon * load;
  return q / gamma_r;
}

Mat5 measurement_cov(double gamma_r, const LookAngles& a, const MeasurementNoiseModel& m) {
  return measurement_cov(gamma_r, a.sin_theta, a.cos_theta, a.cos_phi, m);
}

Vec5 sample_measurement_noise(const Mat5& q_beta, RandomStream& rng) {
  Eigen::LLT<Mat5> llt(q_beta);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("measurement covariance must be positive definite");
  Vec5 g;
  for (int i = 0; i < 5; ++i) g(i) = rng.gauss();
  return llt.matrixL() * g;
}

namespace {

// The measurement components span ~16 orders of magnitude (s^2 delay
// variance against unit trigonometric terms), so both update forms work in
// the whitened measurement space D^-1 beta with D = sqrt(diag(Q_beta)).
Vec5 whitening_scale(const Mat5& q_beta) {
  Vec5 d;
  for (int i = 0; i < 5; ++i) d(i) = std::sqrt(std::max(q_beta(i, i), 1e-300));
  return d;
}

}  // namespace

UpdateResult update(const TrackState& pred, const MeasurementVector& beta,
                    const MeasurementVector& beta_pred, const Mat56& g, const Mat5& q_beta) {
  UpdateResult out;
  const Vec5 d = whitening_scale(q_beta);
  const Vec5 dinv = d.cwiseInverse();
  const Mat56 gs = dinv.asDiagonal() * g;
  const Mat5 qs = dinv.asDiagonal() * q_beta * dinv.asDiagonal();

  Mat5 innov_cov = gs * pred.cov * gs.transpose() + qs;
  Eigen::LDLT<Mat5> ldlt(innov_cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    innov_cov += 1e-12 * innov_cov.trace() * Mat5::Identity();
    ldlt.compute(innov_cov);
    out.regularized = true;
  }
  const Eigen::Matrix<double, 6, 5> k =
      pred.cov * gs.transpose() * ldlt.solve(Mat5::Identity());

  out.state.alpha = pred.alpha + k * (dinv.asDiagonal() * (beta - beta_pred));
  // Joseph evaluation of (I - K G) C: stable against the cancellation when
  // the measurement dominates the prior
  const Mat6 ikg = Mat6::Identity() - k * gs;
  out.state.cov = ikg * pred.cov * ikg.transpose() + k * qs * k.transpose();
  out.state.cov = 0.5 * (out.state.cov + out.state.cov.transpose());
  out.state.slot = pred.slot + 1;
  return out;
}

Mat6 predicted_posterior_cov(const Mat6& c_prior_inv, const Mat56& g, const Mat5& q_beta) {
  const Vec5 d = whitening_scale(q_beta);
  const Vec5 dinv = d.cwiseInverse();
  const Mat56 gs = dinv.asDiagonal() * g;
  const Mat5 qs = dinv.asDiagonal() * q_beta * dinv.asDiagonal();
  const Mat5 qinv = Eigen::LDLT<Mat5>(qs).solve(Mat5::Identity());
  const Mat6 info = c_prior_inv + gs.transpose() * qinv * gs;
  Mat6 cov = Eigen::LDLT<Mat6>(info).solve(Mat6::Identity());
  return 0.5 * (cov + cov.transpose());
}

InformationTerm mse_information_term(const Vec6& predicted_alpha, const Vec3& radar_pos,
                                     const MeasurementNoiseModel& m, double carrier_hz,
                                     double matched_filter_gain, double radar_noise_w) {
  const LookAngles a = look_angles(radar_pos, predicted_alpha.head<3>());
  const Mat56 g = jacobian(predicted_alpha, radar_pos);
  // gamma-independent covariance shape D with Qb = D / gamma_r
  const Mat5 d_shape = measurement_cov(1.0, a, m);
  const Mat5 dinv = Eigen::LDLT<Mat5>(d_shape).solve(Mat5::Identity());

  InformationTerm out;
  out.j = g.transpose() * dinv * g;
  out.j = 0.5 * (out.j + out.j.transpose());
  const double rho0 = rho0_reference(carrier_hz);
  out.gamma_coeff =
      rho0 * rho0 / std::pow(a.distance, 4) * matched_filter_gain / radar_noise_w;
  return out;
}

}  // namespace covertsim
