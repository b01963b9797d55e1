#pragma once

#include "covertsim/linalg.hpp"
#include "covertsim/rng.hpp"

#include <Eigen/Dense>

namespace covertsim {

struct ArrayGeometry {
  int bs_antennas = 6;       // M
  int radar_horizontal = 4;  // N_H
  int radar_vertical = 4;    // N_V
  double spacing = 0.5;      // normalized antenna spacing (wavelengths)

  int radar_antennas() const { return radar_horizontal * radar_vertical; }
  void validate() const;
};

// Azimuth measured in the horizontal plane from broadside (+x), elevation
// angle phi measured from vertical so that cos(phi) = dz / distance.
struct LookAngles {
  double sin_theta = 0.0, cos_theta = 1.0;
  double sin_phi = 0.0, cos_phi = 1.0;
  double distance = 0.0;
};

LookAngles look_angles(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

// Free-space path gain at the 1 m reference, Friis convention.
double rho0_reference(double carrier_hz);

// rho0 * d^-2
double pathloss(double distance_m, double carrier_hz);

// ULA response at the BS, entry m = exp(j 2 pi delta m sin(theta)).
CVec steer_bs(double theta, const ArrayGeometry& g);
CVec steer_bs(const LookAngles& a, const ArrayGeometry& g);

// UPA response, Kronecker product of horizontal and vertical responses.
CVec steer_upa(double theta, double phi, const ArrayGeometry& g);
CVec steer_upa(const LookAngles& a, const ArrayGeometry& g);

// Rician fading around a line-of-sight component.
CVec gen_rician(double distance_m, double carrier_hz, const CVec& los, double k_factor,
                RandomStream& rng);
CMat gen_rician(double distance_m, double carrier_hz, const CMat& los, double k_factor,
                RandomStream& rng);

// Rayleigh flat fading BS-user link.
CVec gen_rayleigh_user(int m, double distance_m, double carrier_hz, RandomStream& rng);

struct UncertaintyModel {
  CMat shape;       // Hermitian positive definite (axes of the ellipsoid)
  double radius = 0.0;  // normalized bound o

  static UncertaintyModel identity(int n, double o);
};

// Free-space adversary link: sqrt(rho0 d^-2) * steering * exp(j omega).
CVec gen_adversary_freespace(const CVec& steering, double distance_m, double carrier_hz,
                             RandomStream& rng);

struct CompositeLink {
  CVec nominal;  // sqrt(rho0 d^-2) * steering
  CVec actual;   // sqrt(rho0 d^-2) * (steering + delta)
  CVec delta;    // steering-domain NLoS error, inside its ellipsoid
};

// Uniform sample of the steering-domain error ellipsoid
// { dh : dh^H C dh <= o^2 ||steering||^2 }.
CVec sample_ellipsoid(const CMat& shape, double bound_sq, RandomStream& rng);

CompositeLink gen_adversary_composite(const CVec& steering, double distance_m,
                                      double carrier_hz, const UncertaintyModel& u,
                                      RandomStream& rng);

// All channels of one slot, nominal (design-side) and true (metric-side).
struct ChannelSet {
  CVec h_ab;   // BS -> user
  CMat H_ar;   // BS -> radar (carried, unused by the designs)
  CVec h_rb;   // radar -> user
  CVec h_aw_nominal, h_aw_true;  // BS -> adversary
  CVec h_rw_nominal, h_rw_true;  // radar -> adversary
  CMat C_aw, C_rw;
  double o_aw = 0.0, o_rw = 0.0;
};

}  // namespace covertsim
