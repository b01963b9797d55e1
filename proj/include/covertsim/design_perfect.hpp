#pragma once

#include "covertsim/cone_program.hpp"
#include "covertsim/linalg.hpp"
#include "covertsim/tracking.hpp"

namespace covertsim {

// Zero-forcing BS beamformer, problem: maximize Re{h_ab^H w} subject to
// Im{h_ab^H w} = 0, h_aw^H w = 0, ||w||^2 <= P_A.
struct BeamformerResult {
  CVec w;
  double objective = 0.0;  // |h_ab^H w|
  bool zero_rate = false;  // h_ab (numerically) parallel to h_aw
};

// Closed-form null-space projection (production path).
BeamformerResult solve_bs_beamformer(const CVec& h_ab, const CVec& h_aw, double p_a);

// Same problem through the conic solver, for cross-checking.
BeamformerResult solve_bs_beamformer_socp(const CVec& h_ab, const CVec& h_aw, double p_a,
                                          double tol = 1e-8);

struct RadarDesignInput {
  CVec h_rb;         // radar-user channel (leakage to minimize)
  CVec a_r;          // predicted radar steering toward the adversary
  Mat6 c_prior;      // EKF prediction covariance C[n|n-1]
  InformationTerm info;
  double mse_max = 10.0;
  double p_r = 10.0;
  double solver_tol = 1e-8;
  bool reduce_subspace = true;  // optimal Q lies in span{a_r, h_rb}
};

struct RadarWaveformResult {
  CMat q;
  bool feasible = false;
  double leakage = 0.0;    // h_rb^H Q h_rb at the optimum
  double snr_term = 0.0;   // attained a_r^H Q a_r
  std::vector<double> t;   // diagonal bounds t_i
  SolveStatus solver_status = SolveStatus::max_iters;
  int iterations = 0;
  std::string message;
};

// Leakage-minimizing radar covariance under the tracking-MSE LMI and power
// budget.  Infeasibility (MSE_max unreachable even at full beamformed power)
// is reported explicitly, never silently.
RadarWaveformResult solve_radar_waveform(const RadarDesignInput& in);

// Feasibility pre-check at the maximal-SNR rank-1 covariance P_R a a^H / N_T.
bool radar_mse_feasible(const RadarDesignInput& in, double* attained_trace = nullptr);

}  // namespace covertsim
