#pragma once

#include "covertsim/cone_program.hpp"
#include "covertsim/linalg.hpp"
#include "covertsim/rng.hpp"
#include "covertsim/tracking.hpp"

#include <string>
#include <vector>

namespace covertsim {

enum class CovertDirection { d01, d10 };

struct RobustDesignInput {
  // legitimate links (perfect CSI)
  CVec h_ab;  // M
  CVec h_rb;  // N_T
  // nominal adversary links (channel domain, path loss included)
  CVec h_aw_nominal;  // M
  CVec h_rw_nominal;  // N_T
  // ellipsoidal NLoS uncertainty, normalized per the channel model:
  // dh^H C dh <= o^2 ||h_nominal||^2 in the channel domain
  CMat c_aw, c_rw;
  double o_aw = 0.0, o_rw = 0.0;

  double epsilon = 0.05;
  CovertDirection direction = CovertDirection::d01;

  // tracking constraint (same terms as the perfect-CSI radar design)
  CVec a_r;  // predicted steering
  Mat6 c_prior = Mat6::Identity();
  InformationTerm info;
  double mse_max = 10.0;

  double p_a = 1.0, p_r = 10.0;
  double sigma_b_sq = 1e-12, sigma_w_sq = 1e-12;

  // Dinkelbach controls
  double l_threshold = 1e-4;
  int max_iterations = 20;
  int randomization_count = 100;
  double solver_tol = 2e-6;
};

struct InnerSdpResult {
  bool feasible = false;
  CMat w_cov;  // W (M x M)
  CMat q;      // Q (N_T x N_T)
  double mu1 = 0.0, mu2 = 0.0;
  double objective = 0.0;  // trace(H_ab W) - l (trace(H_rb Q) + sigma_b^2)
  double numerator = 0.0;  // trace(H_ab W)
  double denominator = 0.0;  // trace(H_rb Q) + sigma_b^2
  SolveStatus solver_status = SolveStatus::max_iters;
  int iterations = 0;
  std::string message;
};

// One problem-(40)-style solve at a fixed Dinkelbach parameter l.
// kappa_cov = x2 - 1 for the D(p0||p1) constraint, 1/x1 - 1 for D(p1||p0).
InnerSdpResult solve_inner_sdp(const RobustDesignInput& in, double l, double kappa_cov);

double covert_kappa(double epsilon, CovertDirection dir);

enum class RobustStatus { ok, infeasible, solver_trouble };

struct RobustSolution {
  RobustStatus status = RobustStatus::infeasible;
  CMat w_cov, q;
  CVec w;                         // extracted beamformer
  std::vector<double> l_history;  // l[0], l[1], then every Dinkelbach update
  double rank_ratio = 0.0;
  bool used_randomization = false;
  bool randomization_fallback = false;
  double x1 = 1.0, x2 = 1.0;
  double final_l = 0.0;
  int inner_iterations_total = 0;
  std::string message;
};

// Ascent check for a recorded iterate history: updates after the two seeds
// must not decrease beyond `slack`, except the terminal entry, whose only
// obligation is the stopping residual |l[end] - l[end-1]| <= l_threshold
// (near the fixed point the ratio is flat, so the confirmatory update can
// wobble by the inner solver's suboptimality over the denominator).
bool dinkelbach_ascent_ok(const std::vector<double>& history, double slack,
                          double l_threshold);

RobustSolution dinkelbach_solve(const RobustDesignInput& in, RandomStream& rng);

// Exact worst-case leakage max_{d^H C d <= r^2} |(h + d)^H w|^2.
double worst_case_leak(const CVec& w, const CVec& h_nom, const CMat& c, double r);

// Exact worst-case jamming min_{d^H C d <= r^2} (h + d)^H Q (h + d), a
// ball-constrained convex quadratic solved by bisection on the multiplier.
double worst_case_jamming(const CMat& q, const CVec& h_nom, const CMat& c, double r);

// SDR rank-1 recovery: candidates from CN(0, W) plus the matched direction
// W h_ab, each scaled to the power budget and backed off to the exact
// worst-case covert constraint; the best legitimate power wins.
CVec gaussian_randomization(const CMat& w_cov, const RobustDesignInput& in, const CMat& q,
                            double kappa_cov, RandomStream& rng, int count,
                            bool* fallback = nullptr);

// Worst-case constraint checker used by tests and the acceptance suite:
// draws ellipsoid samples and returns the fraction satisfying the covert
// constraint, plus the maximum divergence seen.
struct CovertCheck {
  double satisfied_fraction = 0.0;
  double max_divergence = 0.0;
};
CovertCheck check_covert_constraint(const CVec& w, const CMat& q, const RobustDesignInput& in,
                                    int samples, RandomStream& rng);

// Same check at the SDR level, with the leakage in trace form h^H W h.
CovertCheck check_covert_constraint_matrix(const CMat& w_cov, const CMat& q,
                                           const RobustDesignInput& in, int samples,
                                           RandomStream& rng);

}  // namespace covertsim
