#include "covertsim/sim.hpp"

#include "covertsim/covertness.hpp"
#include "covertsim/design_perfect.hpp"
#include "covertsim/design_robust.hpp"

#include <cmath>

namespace covertsim {

namespace {

// substream labels inside a run
enum : std::uint64_t {
  kTrajectory = 1,
  kTrackInit = 2,
  kChannels = 3,
  kMeasurement = 4,
  kRandomization = 5
};

struct NodeSet {
  Vec3 radar, bs, user;
  ArrayGeometry bs_array;     // for the communication beamformer
  ArrayGeometry radar_array;  // for sensing and jamming
  bool shared = false;        // ISAC: one node, one array
};

NodeSet make_nodes(const ScenarioConfig& cfg) {
  NodeSet n;
  n.radar = cfg.radar_position;
  n.user = cfg.user_position;
  n.radar_array = cfg.arrays;
  if (cfg.isac) {
    n.bs = cfg.radar_position;
    n.bs_array = cfg.arrays;  // UPA shared for data transmission
    n.shared = true;
  } else {
    n.bs = cfg.bs_position;
    n.bs_array = cfg.arrays;
  }
  return n;
}

CVec bs_steer(const NodeSet& n, const LookAngles& a) {
  return n.shared ? steer_upa(a, n.radar_array) : steer_bs(a, n.bs_array);
}

int bs_dim(const NodeSet& n) {
  return n.shared ? n.radar_array.radar_antennas() : n.bs_array.bs_antennas;
}

}  // namespace

std::vector<Vec6> gen_trajectory(const ScenarioConfig& cfg, RandomStream& rng) {
  double lo = -M_PI / 36.0, hi = 0.0;
  if (cfg.motion == MotionKind::erratic) {
    lo = -M_PI / 4.0;
    hi = M_PI / 6.0;
  }
  return gen_trajectory_interval(cfg, lo, hi, rng);
}

namespace {

std::vector<Vec6> trajectory_n(const ScenarioConfig& cfg, double lo, double hi, int n,
                               RandomStream& rng);

}  // namespace

std::vector<Vec6> gen_trajectory_interval(const ScenarioConfig& cfg, double lo, double hi,
                                          RandomStream& rng) {
  return trajectory_n(cfg, lo, hi, cfg.slots(), rng);
}

namespace {

std::vector<Vec6> trajectory_n(const ScenarioConfig& cfg, double lo, double hi, int n,
                               RandomStream& rng) {
  const double dt = cfg.slot_duration_s;

  std::vector<Vec6> out(n);
  double heading = cfg.initial_heading_rad;
  Vec3 pos = cfg.initial_position;
  for (int k = 0; k < n; ++k) {
    heading += rng.uniform(lo, hi);
    const Vec3 vel(cfg.speed_mps * std::cos(heading), cfg.speed_mps * std::sin(heading), 0.0);
    if (k > 0) pos += dt * vel;
    out[k].head<3>() = pos;
    out[k].tail<3>() = vel;
  }
  return out;
}

}  // namespace

EpisodeResult run_episode(const ScenarioConfig& cfg, Scheme scheme, RandomStream run_stream) {
  const NodeSet nodes = make_nodes(cfg);
  const int n_slots = cfg.slots();
  const double dt = cfg.slot_duration_s;
  const int nt = nodes.radar_array.radar_antennas();
  const int m = bs_dim(nodes);

  RandomStream traj_rng = run_stream.substream(kTrajectory);
  RandomStream init_rng = run_stream.substream(kTrackInit);
  RandomStream chan_rng = run_stream.substream(kChannels);
  RandomStream meas_rng = run_stream.substream(kMeasurement);
  RandomStream rand_rng = run_stream.substream(kRandomization);

  const int warmup = cfg.warmup_slots;
  double lo = -M_PI / 36.0, hi = 0.0;
  if (cfg.motion == MotionKind::erratic) {
    lo = -M_PI / 4.0;
    hi = M_PI / 6.0;
  }
  const std::vector<Vec6> truth = trajectory_n(cfg, lo, hi, warmup + n_slots, traj_rng);
  const MeasurementNoiseModel noise_model = cfg.noise_model();
  const Mat6 q_alpha = process_noise(cfg.accel_sigma, dt);

  // track acquisition around the true initial state
  TrackState track;
  track.alpha = truth[0];
  for (int i = 0; i < 3; ++i) track.alpha(i) += cfg.init_pos_sigma * init_rng.gauss();
  for (int i = 3; i < 6; ++i) track.alpha(i) += cfg.init_vel_sigma * init_rng.gauss();
  track.cov = Mat6::Zero();
  track.cov.topLeftCorner<3, 3>() =
      cfg.init_pos_sigma * cfg.init_pos_sigma * Eigen::Matrix3d::Identity();
  track.cov.bottomRightCorner<3, 3>() =
      cfg.init_vel_sigma * cfg.init_vel_sigma * Eigen::Matrix3d::Identity();

  const double p_a = cfg.bs_power_w();
  const double p_r = cfg.radar_power_w();
  const double sigma_b = cfg.noise_user_w();
  const double sigma_w = cfg.noise_adversary_w();
  const double sigma_r = cfg.noise_radar_w();

  // Detection-mode warm-up: the radar tracks with a full-power beam at the
  // predicted target before any covert transmission starts.
  for (int k = 0; k < warmup; ++k) {
    const TrackState pred = (k == 0) ? track : predict(track, dt, q_alpha);
    const LookAngles rw_pred = look_angles(nodes.radar, pred.position());
    const CVec a_r_pred = steer_upa(rw_pred, nodes.radar_array);
    const CMat q = (p_r / nt) * (a_r_pred * a_r_pred.adjoint());

    const LookAngles rw_true = look_angles(nodes.radar, truth[k].head<3>());
    const CVec a_r_true = steer_upa(rw_true, nodes.radar_array);
    const double gamma_true =
        std::max(radar_snr(q, rw_true.distance, a_r_true, cfg.carrier_hz,
                           cfg.matched_filter_gain, sigma_r),
                 1e-30);
    const double gamma_pred =
        std::max(radar_snr(q, rw_pred.distance, a_r_pred, cfg.carrier_hz,
                           cfg.matched_filter_gain, sigma_r),
                 1e-30);
    const MeasurementVector beta =
        measurement_fn(truth[k], nodes.radar) +
        sample_measurement_noise(measurement_cov(gamma_true, rw_true, noise_model), meas_rng);
    track = update(pred, beta, measurement_fn(pred.alpha, nodes.radar),
                   jacobian(pred.alpha, nodes.radar),
                   measurement_cov(gamma_pred, rw_pred, noise_model))
                .state;
  }

  EpisodeResult ep;
  ep.scheme = scheme;
  ep.slots.reserve(n_slots);

  for (int slot = 0; slot < n_slots; ++slot) {
    // slot-0 bootstrap designs at the current track (no measurement yet)
    const TrackState pred =
        (slot == 0 && warmup == 0) ? track : predict(track, dt, q_alpha);

    SlotRecord rec;
    rec.slot = slot;
    rec.true_state = truth[warmup + slot];

    // predicted geometry and nominal adversary channels
    const LookAngles aw_pred = look_angles(nodes.bs, pred.position());
    const LookAngles rw_pred = look_angles(nodes.radar, pred.position());
    const CVec a_r_pred = steer_upa(rw_pred, nodes.radar_array);
    const CVec h_aw_nom = std::sqrt(pathloss(aw_pred.distance, cfg.carrier_hz)) *
                          bs_steer(nodes, aw_pred);
    const CVec h_rw_nom = std::sqrt(pathloss(rw_pred.distance, cfg.carrier_hz)) * a_r_pred;

    const InformationTerm info = mse_information_term(
        pred.alpha, nodes.radar, noise_model, cfg.carrier_hz, cfg.matched_filter_gain, sigma_r);

    // legitimate channels, perfectly known to the CCU
    CVec h_rb;
    {
      const LookAngles rb = look_angles(nodes.radar, nodes.user);
      h_rb = gen_rician((nodes.user - nodes.radar).norm(), cfg.carrier_hz,
                        steer_upa(rb, nodes.radar_array), cfg.rician_k, chan_rng);
    }
    CVec h_ab;
    if (nodes.shared) {
      h_ab = h_rb;  // co-located: one physical link
    } else {
      h_ab = gen_rayleigh_user(m, (nodes.user - nodes.bs).norm(), cfg.carrier_hz, chan_rng);
    }

    // scheme-specific design
    CVec w = CVec::Zero(m);
    CMat q = CMat::Zero(nt, nt);
    {
      RadarDesignInput rin;
      rin.h_rb = h_rb;
      rin.a_r = a_r_pred;
      rin.c_prior = pred.cov;
      rin.info = info;
      rin.mse_max = cfg.mse_max;
      rin.p_r = p_r;
      rin.solver_tol = cfg.solver_tol;
      rec.mse_feasible = radar_mse_feasible(rin);

      switch (scheme) {
        case Scheme::perfect:
        case Scheme::mrt_baseline: {
          const RadarWaveformResult rr = solve_radar_waveform(rin);
          if (rr.feasible) {
            q = rr.q;
          } else {
            rec.design_feasible = false;
            q = (p_r / nt) * (a_r_pred * a_r_pred.adjoint());  // keep tracking alive
          }
          if (scheme == Scheme::perfect) {
            const BeamformerResult b = solve_bs_beamformer(h_ab, h_aw_nom, p_a);
            w = rr.feasible ? b.w : CVec(CVec::Zero(m));
          } else {
            w = std::sqrt(p_a) * h_ab / h_ab.norm();
          }
          break;
        }
        case Scheme::robust_d01:
        case Scheme::robust_d10:
        case Scheme::nonrobust: {
          RobustDesignInput din;
          din.h_ab = h_ab;
          din.h_rb = h_rb;
          din.h_aw_nominal = h_aw_nom;
          din.h_rw_nominal = h_rw_nom;
          din.c_aw = CMat::Identity(m, m);
          din.c_rw = CMat::Identity(nt, nt);
          din.o_aw = scheme == Scheme::nonrobust ? 0.0 : cfg.o_aw;
          din.o_rw = scheme == Scheme::nonrobust ? 0.0 : cfg.o_rw;
          din.epsilon = cfg.epsilon;
          din.direction = scheme == Scheme::robust_d10 ? CovertDirection::d10
                                                       : CovertDirection::d01;
          din.a_r = a_r_pred;
          din.c_prior = pred.cov;
          din.info = info;
          din.mse_max = cfg.mse_max;
          din.p_a = p_a;
          din.p_r = p_r;
          din.sigma_b_sq = sigma_b;
          din.sigma_w_sq = sigma_w;
          din.l_threshold = cfg.l_threshold;
          din.max_iterations = cfg.dinkelbach_max_iterations;
          din.randomization_count = cfg.randomization_count;
          din.solver_tol = cfg.robust_solver_tol;

          RandomStream slot_rand = rand_rng.substream(slot);
          const RobustSolution sol = dinkelbach_solve(din, slot_rand);
          if (sol.status == RobustStatus::ok) {
            w = sol.w;
            q = sol.q;
            rec.dinkelbach_updates = static_cast<int>(sol.l_history.size()) - 2;
            rec.rank_ratio = sol.rank_ratio;
            rec.used_randomization = sol.used_randomization;
            rec.l_history = sol.l_history;
          } else {
            rec.design_feasible = false;
            q = (p_r / nt) * (a_r_pred * a_r_pred.adjoint());
          }
          break;
        }
      }
    }

    // true channels at the true adversary position
    const LookAngles aw_true = look_angles(nodes.bs, truth[warmup + slot].head<3>());
    const LookAngles rw_true = look_angles(nodes.radar, truth[warmup + slot].head<3>());
    CVec h_aw_true, h_rw_true;
    if (cfg.csi == CsiModel::freespace) {
      h_aw_true = gen_adversary_freespace(bs_steer(nodes, aw_true), aw_true.distance,
                                          cfg.carrier_hz, chan_rng);
      h_rw_true = gen_adversary_freespace(steer_upa(rw_true, nodes.radar_array),
                                          rw_true.distance, cfg.carrier_hz, chan_rng);
    } else {
      const UncertaintyModel uaw = UncertaintyModel::identity(m, cfg.o_aw);
      const UncertaintyModel urw = UncertaintyModel::identity(nt, cfg.o_rw);
      h_aw_true = gen_adversary_composite(bs_steer(nodes, aw_true), aw_true.distance,
                                          cfg.carrier_hz, uaw, chan_rng)
                      .actual;
      h_rw_true = gen_adversary_composite(steer_upa(rw_true, nodes.radar_array),
                                          rw_true.distance, cfg.carrier_hz, urw, chan_rng)
                      .actual;
    }
    if (nodes.shared) h_aw_true = h_rw_true;

    const DetectionStats stats = detection_stats(w, q, h_aw_true, h_rw_true, sigma_w);
    rec.lambda0 = stats.lambda0;
    rec.lambda1 = stats.lambda1;
    rec.d01 = stats.d01;
    rec.d10 = stats.d10;
    rec.p_fa = stats.p_fa;
    rec.p_md = stats.p_md;
    rec.xi = stats.xi;
    rec.rate = achievable_rate(w, q, h_ab, h_rb, sigma_b);
    rec.bs_power = w.squaredNorm();

    // measurement at the true geometry, filtered at the predicted one
    const CVec a_r_true = steer_upa(rw_true, nodes.radar_array);
    const double gamma_true =
        std::max(radar_snr(q, rw_true.distance, a_r_true, cfg.carrier_hz,
                           cfg.matched_filter_gain, sigma_r),
                 1e-30);
    const double gamma_pred =
        std::max(radar_snr(q, rw_pred.distance, a_r_pred, cfg.carrier_hz,
                           cfg.matched_filter_gain, sigma_r),
                 1e-30);
    const MeasurementVector beta_true = measurement_fn(truth[warmup + slot], nodes.radar);
    const Mat5 qb_true = measurement_cov(gamma_true, rw_true, noise_model);
    const MeasurementVector beta = beta_true + sample_measurement_noise(qb_true, meas_rng);

    const Mat5 qb_pred = measurement_cov(gamma_pred, rw_pred, noise_model);
    const Mat56 g = jacobian(pred.alpha, nodes.radar);
    const MeasurementVector beta_pred = measurement_fn(pred.alpha, nodes.radar);
    const UpdateResult upd = update(pred, beta, beta_pred, g, qb_pred);
    track = upd.state;

    rec.est_state = track.alpha;
    rec.mse = track.cov.trace();
    rec.pos_err_sq = (track.alpha.head<3>() - truth[warmup + slot].head<3>()).squaredNorm();
    ep.slots.push_back(rec);
  }
  return ep;
}

double SchemeAggregate::mean(double SlotRecord::* field) const {
  if (records.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : records) acc += r.*field;
  return acc / static_cast<double>(records.size());
}

std::vector<double> SchemeAggregate::samples(double SlotRecord::* field) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

AggregateResult monte_carlo(const ScenarioConfig& cfg) {
  AggregateResult agg;
  agg.runs = cfg.runs;
  agg.slots = cfg.slots();

  RandomStream master(cfg.seed);
  for (Scheme scheme : cfg.schemes) {
    SchemeAggregate sa;
    sa.scheme = scheme;
    sa.runs = cfg.runs;
    sa.slots = agg.slots;
    for (int run = 0; run < cfg.runs; ++run) {
      // paired seeds: the run substream does not depend on the scheme
      EpisodeResult ep = run_episode(cfg, scheme, master.substream(run));
      sa.records.insert(sa.records.end(), ep.slots.begin(), ep.slots.end());
    }
    // per-slot means over runs
    sa.slot_means.assign(agg.slots, SlotRecord{});
    for (int s = 0; s < agg.slots; ++s) sa.slot_means[s].slot = s;
    for (int run = 0; run < cfg.runs; ++run) {
      for (int s = 0; s < agg.slots; ++s) {
        const SlotRecord& r = sa.records[run * agg.slots + s];
        SlotRecord& m = sa.slot_means[s];
        m.mse += r.mse;
        m.pos_err_sq += r.pos_err_sq;
        m.d01 += r.d01;
        m.d10 += r.d10;
        m.p_fa += r.p_fa;
        m.p_md += r.p_md;
        m.xi += r.xi;
        m.rate += r.rate;
        m.bs_power += r.bs_power;
      }
    }
    for (auto& m : sa.slot_means) {
      const double inv = 1.0 / cfg.runs;
      m.mse *= inv;
      m.pos_err_sq *= inv;
      m.d01 *= inv;
      m.d10 *= inv;
      m.p_fa *= inv;
      m.p_md *= inv;
      m.xi *= inv;
      m.rate *= inv;
      m.bs_power *= inv;
    }
    agg.schemes.push_back(std::move(sa));
  }
  return agg;
}

}  // namespace covertsim
