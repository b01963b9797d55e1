#pragma once

#include "covertsim/channels.hpp"
#include "covertsim/rng.hpp"

#include <Eigen/Dense>

namespace covertsim {

using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat56 = Eigen::Matrix<double, 5, 6>;

// Adversary kinematic state [x y z vx vy vz] with its covariance.
struct TrackState {
  Vec6 alpha = Vec6::Zero();
  Mat6 cov = Mat6::Identity();
  int slot = 0;

  Vec3 position() const { return alpha.head<3>(); }
  Vec3 velocity() const { return alpha.tail<3>(); }
};

// Measurement vector [tau, radial speed, sin(theta), cos(theta), sin(phi)].
using MeasurementVector = Vec5;

struct MeasurementNoiseModel {
  double a1 = 1.0, a2 = 1.0, a3 = 1.0, a4 = 1.0;
  double reg_epsilon = 1e-6;
};

// Constant-velocity transition [[I, dt I], [0, I]].
Mat6 transition_matrix(double dt);

// White-acceleration process noise for the constant-velocity model.
Mat6 process_noise(double accel_sigma, double dt);

TrackState predict(const TrackState& s, double dt, const Mat6& q_alpha);

// Two-way delay, signed range rate, and angle components toward the target.
MeasurementVector measurement_fn(const Vec6& alpha, const Vec3& radar_pos);

// Analytic Jacobian of measurement_fn at the given state.
Mat56 jacobian(const Vec6& alpha, const Vec3& radar_pos);

// SNR-scaled measurement covariance; the (sin, cos) azimuth block is exactly
// singular before the diagonal loading reg_epsilon * (a3 / gamma) * I.
Mat5 measurement_cov(double gamma_r, double sin_theta, double cos_theta, double cos_phi,
                     const MeasurementNoiseModel& m);
Mat5 measurement_cov(double gamma_r, const LookAngles& a, const MeasurementNoiseModel& m);

Vec5 sample_measurement_noise(const Mat5& q_beta, RandomStream& rng);

struct UpdateResult {
  TrackState state;
  bool regularized = false;  // innovation covariance needed extra loading
};

UpdateResult update(const TrackState& pred, const MeasurementVector& beta,
                    const MeasurementVector& beta_pred, const Mat56& g, const Mat5& q_beta);

// Information-form posterior (C_prior^-1 + G' Qb^-1 G)^-1.
Mat6 predicted_posterior_cov(const Mat6& c_prior_inv, const Mat56& g, const Mat5& q_beta);

// Splits the predicted information increment so that
//   G' Qb(Q)^-1 G = gamma_r(Q) * j,    gamma_r(Q) = gamma_coeff * a_r^H Q a_r,
// which keeps the posterior information affine in the radar covariance Q.
struct InformationTerm {
  Mat6 j = Mat6::Zero();
  double gamma_coeff = 0.0;  // rho0^2 d^-4 G_MF / sigma_r^2
};

InformationTerm mse_information_term(const Vec6& predicted_alpha, const Vec3& radar_pos,
                                     const MeasurementNoiseModel& m, double carrier_hz,
                                     double matched_filter_gain, double radar_noise_w);

}  // namespace covertsim
