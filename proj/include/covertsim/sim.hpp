#pragma once

#include "covertsim/scenario.hpp"
#include "covertsim/tracking.hpp"

#include <vector>

namespace covertsim {

// True adversary states along a constant-speed trajectory whose heading
// accumulates per-slot increments (circling: U[-pi/36, 0]; erratic:
// U[-pi/4, pi/6]); altitude stays constant.
std::vector<Vec6> gen_trajectory(const ScenarioConfig& cfg, RandomStream& rng);

// Same generator with an explicit heading-increment interval.
std::vector<Vec6> gen_trajectory_interval(const ScenarioConfig& cfg, double lo, double hi,
                                          RandomStream& rng);

struct SlotRecord {
  int slot = 0;
  Vec6 true_state = Vec6::Zero();
  Vec6 est_state = Vec6::Zero();
  double mse = 0.0;         // trace of the posterior covariance
  double pos_err_sq = 0.0;  // empirical squared position error
  double lambda0 = 0.0, lambda1 = 0.0;
  double d01 = 0.0, d10 = 0.0;
  double p_fa = 0.0, p_md = 0.0, xi = 0.0;
  double rate = 0.0;
  double bs_power = 0.0;
  bool design_feasible = true;
  bool mse_feasible = true;       // pre-check at full beamformed power
  int dinkelbach_updates = 0;
  double rank_ratio = 0.0;
  bool used_randomization = false;
  std::vector<double> l_history;  // robust schemes only
};

struct EpisodeResult {
  Scheme scheme = Scheme::perfect;
  std::vector<SlotRecord> slots;
};

// One tracked episode: per slot, EKF predict, channel construction from the
// predicted state, scheme design, metrics against the true channels, then a
// noisy measurement at the designed echo SNR and the EKF update.
EpisodeResult run_episode(const ScenarioConfig& cfg, Scheme scheme, RandomStream run_stream);

struct SchemeAggregate {
  Scheme scheme = Scheme::perfect;
  int runs = 0, slots = 0;
  std::vector<SlotRecord> records;       // runs x slots, run-major
  std::vector<SlotRecord> slot_means;    // per-slot means over runs
  double mean(double SlotRecord::* field) const;
  std::vector<double> samples(double SlotRecord::* field) const;
};

struct AggregateResult {
  std::vector<SchemeAggregate> schemes;
  int runs = 0, slots = 0;
};

// Independent per-run substreams derived from the master seed; runs are
// paired across schemes (same channels and trajectories).
AggregateResult monte_carlo(const ScenarioConfig& cfg);

}  // namespace covertsim
