#include "covertsim/covertness.hpp"

#include <cmath>
#include <stdexcept>

namespace covertsim {

std::pair<double, double> lambdas(const CVec& w, const CMat& q, const CVec& h_aw,
                                  const CVec& h_rw, double sigma_w_sq) {
  if (!(sigma_w_sq > 0.0)) throw std::invalid_argument("noise power must be positive");
  const double jam = (h_rw.adjoint() * q * h_rw)(0, 0).real();
  const double leak = std::norm(h_aw.dot(w));  // Eigen dot conjugates the lhs
  const double l0 = jam + sigma_w_sq;
  return {l0, l0 + leak};
}

std::pair<double, double> kl_divergences(double lambda0, double lambda1) {
  if (!(lambda0 > 0.0) || !(lambda1 > 0.0))
    throw std::invalid_argument("lambdas must be positive");
  const double r = lambda1 / lambda0;
  const double d01 = std::log(r) + 1.0 / r - 1.0;
  const double d10 = -std::log(r) + r - 1.0;
  return {std::max(0.0, d01), std::max(0.0, d10)};
}

double detection_threshold(double lambda0, double lambda1) {
  if (lambda1 <= lambda0) return lambda0;  // continuity limit
  return lambda0 * lambda1 / (lambda1 - lambda0) * std::log(lambda1 / lambda0);
}

ErrorProbabilities error_probabilities(double lambda0, double lambda1) {
  ErrorProbabilities e;
  if (lambda1 <= lambda0) {
    // indistinguishable hypotheses
    const double eta = detection_threshold(lambda0, lambda0);
    e.p_fa = std::exp(-eta / lambda0);
    e.p_md = 1.0 - std::exp(-eta / lambda0);
    e.xi = 1.0;
    return e;
  }
  const double eta = detection_threshold(lambda0, lambda1);
  e.p_fa = std::exp(-eta / lambda0);
  e.p_md = 1.0 - std::exp(-eta / lambda1);
  e.xi = e.p_fa + e.p_md;
  return e;
}

DetectionStats detection_stats(const CVec& w, const CMat& q, const CVec& h_aw,
                               const CVec& h_rw, double sigma_w_sq) {
  DetectionStats s;
  std::tie(s.lambda0, s.lambda1) = lambdas(w, q, h_aw, h_rw, sigma_w_sq);
  std::tie(s.d01, s.d10) = kl_divergences(s.lambda0, s.lambda1);
  s.eta = detection_threshold(s.lambda0, s.lambda1);
  const ErrorProbabilities e = error_probabilities(s.lambda0, s.lambda1);
  s.p_fa = e.p_fa;
  s.p_md = e.p_md;
  s.xi = e.xi;
  return s;
}

std::pair<double, double> covert_roots(double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0, 1]");
  const double target = 2.0 * epsilon * epsilon;
  if (target == 0.0) return {1.0, 1.0};

  const auto f = [target](double x) { return std::log(x) + 1.0 / x - 1.0 - target; };

  // f decreases on (0, 1), increases on (1, inf), f(1) = -target < 0
  auto bisect = [&](double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(lo) * f(mid) <= 0.0) hi = mid;
      else lo = mid;
      if (hi - lo < 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
  };

  double lo = 1.0;
  while (f(lo) < 0.0) lo *= 0.5;
  const double x1 = bisect(lo, 1.0);

  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  const double x2 = bisect(1.0, hi);
  return {x1, x2};
}

double achievable_rate(const CVec& w, const CMat& q, const CVec& h_ab, const CVec& h_rb,
                       double sigma_b_sq) {
  const double sig = std::norm(h_ab.dot(w));
  const double interf = (h_rb.adjoint() * q * h_rb)(0, 0).real();
  return std::log2(1.0 + sig / (interf + sigma_b_sq));
}

double radar_snr(const CMat& q, double distance_m, const CVec& a_r, double carrier_hz,
                 double matched_filter_gain, double radar_noise_w) {
  const double rho0 = rho0_reference(carrier_hz);
  const double gain = (a_r.adjoint() * q * a_r)(0, 0).real();
  return rho0 * rho0 / std::pow(distance_m, 4) * matched_filter_gain *
         std::max(0.0, gain) / radar_noise_w;
}

}  // namespace covertsim
