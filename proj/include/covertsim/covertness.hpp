#pragma once

#include "covertsim/channels.hpp"
#include "covertsim/linalg.hpp"

namespace covertsim {

// Received-power parameters and detection metrics at the adversary for one
// slot.  lambda0 is jamming-plus-noise, lambda1 adds the signal leakage.
struct DetectionStats {
  double lambda0 = 0.0, lambda1 = 0.0;
  double d01 = 0.0, d10 = 0.0;  // KL divergences, nats
  double eta = 0.0;             // Neyman-Pearson threshold on |y_w|^2
  double p_fa = 0.0, p_md = 0.0;
  double xi = 0.0;  // total detection error = p_fa + p_md
};

// lambda0 = h_rw^H Q h_rw + sigma_w^2, lambda1 = lambda0 + |h_aw^H w|^2.
std::pair<double, double> lambdas(const CVec& w, const CMat& q, const CVec& h_aw,
                                  const CVec& h_rw, double sigma_w_sq);

// D(p0||p1) = ln(l1/l0) + l0/l1 - 1 and the reverse direction.
std::pair<double, double> kl_divergences(double lambda0, double lambda1);

// eta = l0 l1 ln(l1/l0) / (l1 - l0), extended by continuity at l1 = l0.
double detection_threshold(double lambda0, double lambda1);

// P_FA = exp(-eta/l0), P_MD = 1 - exp(-eta/l1), xi = P_FA + P_MD.  The test
// statistic |y_w|^2 is exponential with mean l0 / l1 under H0 / H1, which is
// where the closed forms come from.
struct ErrorProbabilities {
  double p_fa = 0.0, p_md = 0.0, xi = 0.0;
};
ErrorProbabilities error_probabilities(double lambda0, double lambda1);

DetectionStats detection_stats(const CVec& w, const CMat& q, const CVec& h_aw,
                               const CVec& h_rw, double sigma_w_sq);

// Roots x1 <= 1 <= x2 of ln x + 1/x - 1 = 2 eps^2, by bracketed bisection.
std::pair<double, double> covert_roots(double epsilon);

// log2(1 + |h_ab^H w|^2 / (h_rb^H Q h_rb + sigma_b^2))
double achievable_rate(const CVec& w, const CMat& q, const CVec& h_ab, const CVec& h_rb,
                       double sigma_b_sq);

// rho0^2 d^-4 G_MF a_r^H Q a_r / sigma_r^2
double radar_snr(const CMat& q, double distance_m, const CVec& a_r, double carrier_hz,
                 double matched_filter_gain, double radar_noise_w);

}  // namespace covertsim
