#include "covertsim/channels.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace covertsim {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

void ArrayGeometry::validate() const {
  if (bs_antennas < 1 || radar_horizontal < 1 || radar_vertical < 1)
    throw std::invalid_argument("array sizes must be >= 1");
  if (!(spacing > 0.0)) throw std::invalid_argument("antenna spacing must be positive");
}

LookAngles look_angles(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d d = to - from;
  LookAngles a;
  a.distance = d.norm();
  if (a.distance <= 0.0) throw std::invalid_argument("coincident geometry");
  const double dh = std::hypot(d.x(), d.y());
  if (dh > 0.0) {
    a.sin_theta = d.y() / dh;
    a.cos_theta = d.x() / dh;
  } else {
    a.sin_theta = 0.0;  // zenith convention anchor
    a.cos_theta = 1.0;
  }
  a.sin_phi = dh / a.distance;
  a.cos_phi = d.z() / a.distance;
  return a;
}

double rho0_reference(double carrier_hz) {
  const double lambda = kSpeedOfLight / carrier_hz;
  const double x = lambda / (4.0 * M_PI);
  return x * x;
}

double pathloss(double distance_m, double carrier_hz) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
  return rho0_reference(carrier_hz) / (distance_m * distance_m);
}

namespace {

CVec phase_ramp(int n, double step) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, step * i);
  return v;
}

}  // namespace

CVec steer_bs(double theta, const ArrayGeometry& g) {
  return phase_ramp(g.bs_antennas, 2.0 * M_PI * g.spacing * std::sin(theta));
}

CVec steer_bs(const LookAngles& a, const ArrayGeometry& g) {
  return phase_ramp(g.bs_antennas, 2.0 * M_PI * g.spacing * a.sin_theta);
}

CVec steer_upa(double theta, double phi, const ArrayGeometry& g) {
  LookAngles a;
  a.sin_theta = std::sin(theta);
  a.cos_theta = std::cos(theta);
  a.sin_phi = std::sin(phi);
  a.cos_phi = std::cos(phi);
  a.distance = 1.0;
  return steer_upa(a, g);
}

CVec steer_upa(const LookAngles& a, const ArrayGeometry& g) {
  const CVec horiz =
      phase_ramp(g.radar_horizontal, 2.0 * M_PI * g.spacing * a.sin_phi * a.sin_theta);
  const CVec vert = phase_ramp(g.radar_vertical, 2.0 * M_PI * g.spacing * a.cos_phi);
  CVec out(g.radar_antennas());
  for (int h = 0; h < g.radar_horizontal; ++h)
    for (int v = 0; v < g.radar_vertical; ++v)
      out(h * g.radar_vertical + v) = horiz(h) * vert(v);
  return out;
}

CVec gen_rician(double distance_m, double carrier_hz, const CVec& los, double k_factor,
                RandomStream& rng) {
  if (k_factor < 0.0) throw std::invalid_argument("Rician factor must be >= 0");
  const double amp = std::sqrt(pathloss(distance_m, carrier_hz));
  const double w_los = std::sqrt(k_factor / (k_factor + 1.0));
  const double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
  CVec out(los.size());
  for (int i = 0; i < los.size(); ++i) out(i) = amp * (w_los * los(i) + w_nlos * rng.cgauss());
  return out;
}

CMat gen_rician(double distance_m, double carrier_hz, const CMat& los, double k_factor,
                RandomStream& rng) {
  if (k_factor < 0.0) throw std::invalid_argument("Rician factor must be >= 0");
  const double amp = std::sqrt(pathloss(distance_m, carrier_hz));
  const double w_los = std::sqrt(k_factor / (k_factor + 1.0));
  const double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
  CMat out(los.rows(), los.cols());
  for (int c = 0; c < los.cols(); ++c)
    for (int r = 0; r < los.rows(); ++r)
      out(r, c) = amp * (w_los * los(r, c) + w_nlos * rng.cgauss());
  return out;
}

CVec gen_rayleigh_user(int m, double distance_m, double carrier_hz, RandomStream& rng) {
  if (m < 1) throw std::invalid_argument("antenna count must be >= 1");
  const double amp = std::sqrt(pathloss(distance_m, carrier_hz));
  CVec out(m);
  for (int i = 0; i < m; ++i) out(i) = amp * rng.cgauss();
  return out;
}

UncertaintyModel UncertaintyModel::identity(int n, double o) {
  UncertaintyModel u;
  u.shape = CMat::Identity(n, n);
  u.radius = o;
  return u;
}

CVec gen_adversary_freespace(const CVec& steering, double distance_m, double carrier_hz,
                             RandomStream& rng) {
  const double amp = std::sqrt(pathloss(distance_m, carrier_hz));
  const Cplx omega = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
  return amp * omega * steering;
}

CVec sample_ellipsoid(const CMat& shape, double bound_sq, RandomStream& rng) {
  const int n = static_cast<int>(shape.rows());
  Eigen::LLT<CMat> llt(shape);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("uncertainty shape matrix must be positive definite");
  if (bound_sq <= 0.0) return CVec::Zero(n);

  CVec z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.cgauss();
  const double nz = z.norm();
  if (nz == 0.0) return CVec::Zero(n);
  z /= nz;
  // uniform radius in the 2n-real-dimensional ball
  const double r = std::pow(rng.uniform01(), 1.0 / (2.0 * n));
  const CVec unit = llt.matrixL().adjoint().solve(z);
  return std::sqrt(bound_sq) * r * unit;
}

CompositeLink gen_adversary_composite(const CVec& steering, double distance_m,
                                      double carrier_hz, const UncertaintyModel& u,
                                      RandomStream& rng) {
  if (u.radius < 0.0) throw std::invalid_argument("uncertainty radius must be >= 0");
  const double amp = std::sqrt(pathloss(distance_m, carrier_hz));
  CompositeLink link;
  link.nominal = amp * steering;
  const double bound_sq = u.radius * u.radius * steering.squaredNorm();
  link.delta = u.radius > 0.0 ? sample_ellipsoid(u.shape, bound_sq, rng)
                              : CVec(CVec::Zero(steering.size()));
  link.actual = amp * (steering + link.delta);
  return link;
}

}  // namespace covertsim
