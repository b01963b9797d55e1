// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Every tolerance is pinned here; run via ctest or directly.

#include "covertsim/covertness.hpp"
#include "covertsim/design_robust.hpp"
#include "covertsim/results_io.hpp"
#include "covertsim/scenario.hpp"
#include "covertsim/sim.hpp"
#include "covertsim/solver_check.hpp"
#include "covertsim/tracking.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace covertsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double wall_seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion_solver() {
  const SelfCheckResult r = run_solver_selfcheck(200, 90210);
  std::ostringstream os;
  os << r.passed << "/" << r.programs << " programs, max obj err " << r.max_obj_rel_err
     << ", max KKT " << r.max_kkt_residual << ", worst " << r.worst_ms << " ms";
  Outcome out;
  out.pass = r.ok() && r.max_obj_rel_err <= 1e-6 && r.max_kkt_residual <= 1e-7 &&
             r.worst_ms < 50.0;
  out.detail = os.str();
  if (!r.failures.empty()) out.detail += "; first failure: " + r.failures.front();
  return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion_ekf() {
  const Vec3 radar(0, 0, 30);
  RandomStream rng(777);

  auto random_state = [&rng]() {
    Vec6 a;
    a << rng.uniform(200.0, 1500.0), rng.uniform(-400.0, 400.0), rng.uniform(60.0, 400.0),
        rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), rng.uniform(-10.0, 10.0);
    return a;
  };

  double worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec6 s = random_state();
    const Mat56 ja = jacobian(s, radar);
    Mat56 fd;
    for (int k = 0; k < 6; ++k) {
      const double h = std::max(1e-4 * std::abs(s(k)), 1e-6);
      Vec6 up = s, dn = s;
      up(k) += h;
      dn(k) -= h;
      fd.col(k) = (measurement_fn(up, radar) - measurement_fn(dn, radar)) / (2.0 * h);
    }
    worst_fd = std::max(worst_fd, (ja - fd).norm() / (1.0 + ja.norm()));
  }

  MeasurementNoiseModel m = default_scenario().noise_model();
  double worst_eq = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    TrackState pred;
    pred.alpha = random_state();
    Eigen::Matrix<double, 6, 6> g;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) g(i, j) = rng.gauss();
    pred.cov = g * g.transpose() + 0.5 * Mat6::Identity();

    const Mat56 jac = jacobian(pred.alpha, radar);
    const LookAngles ang = look_angles(radar, pred.alpha.head<3>());
    const Mat5 qb = measurement_cov(rng.uniform(1e-6, 1e-3), ang, m);
    const MeasurementVector bp = measurement_fn(pred.alpha, radar);
    const UpdateResult u = update(pred, bp, bp, jac, qb);
    const Mat6 info = predicted_posterior_cov(pred.cov.inverse(), jac, qb);
    worst_eq = std::max(worst_eq, (u.state.cov - info).norm() / info.norm());
  }

  std::ostringstream os;
  os << "Jacobian FD rel err " << worst_fd << " (<= 1e-5), posterior forms rel err "
     << worst_eq << " (<= 1e-8)";
  return {worst_fd <= 1e-5 && worst_eq <= 1e-8, os.str()};
}

// shared Monte-Carlo study for criteria 3, 7, 9
struct FreeSpaceStudy {
  double cdf_d01_at_1em8 = 0.0;
  double median_perfect = 0.0, median_mrt = 0.0;
  double mse_feasible_fraction = 0.0;
  double seconds = 0.0;
};

const FreeSpaceStudy& free_space_study() {
  static FreeSpaceStudy study = [] {
    FreeSpaceStudy s;
    s.seconds = wall_seconds([&s] {
      ScenarioConfig cfg = default_scenario();
      cfg.runs = 100;  // 100 runs x 100 slots
      cfg.seed = 20240;
      cfg.schemes = {Scheme::perfect, Scheme::mrt_baseline};
      const AggregateResult agg = monte_carlo(cfg);

      const SchemeAggregate& perfect = agg.schemes[0];
      const SchemeAggregate& mrt = agg.schemes[1];
      int covert = 0, feas = 0;
      for (const auto& r : perfect.records) {
        covert += (r.d01 <= 1e-8);
        feas += r.mse_feasible;
      }
      s.cdf_d01_at_1em8 = double(covert) / perfect.records.size();
      s.mse_feasible_fraction = double(feas) / perfect.records.size();
      s.median_perfect = median(perfect.samples(&SlotRecord::d01));
      s.median_mrt = median(mrt.samples(&SlotRecord::d01));
    });
    return s;
  }();
  return study;
}

// ---------------------------------------------------------------- criterion 3
Outcome criterion_perfect_covertness() {
  const FreeSpaceStudy& s = free_space_study();
  std::ostringstream os;
  os << "P[D(p0||p1) <= 1e-8] = " << s.cdf_d01_at_1em8 << " (>= 0.99) over 100x100 slots in "
     << s.seconds << " s (< 600 s)";
  return {s.cdf_d01_at_1em8 >= 0.99 && s.seconds < 600.0, os.str()};
}

// robust-design instances at scenario scale (composite, low altitude)
RobustDesignInput robust_instance(RandomStream& rng, const ScenarioConfig& cfg, double eps,
                                  double o, CovertDirection dir) {
  const ArrayGeometry g = cfg.arrays;
  const Vec3 radar = cfg.radar_position, bs = cfg.bs_position, user = cfg.user_position;
  const Vec3 adv(1100.0 + rng.uniform(-100, 100), 75.0 + rng.uniform(-60, 60), 60.0);

  RobustDesignInput in;
  in.h_ab = gen_rayleigh_user(g.bs_antennas, (user - bs).norm(), cfg.carrier_hz, rng);
  const LookAngles rb = look_angles(radar, user);
  in.h_rb = gen_rician((user - radar).norm(), cfg.carrier_hz, steer_upa(rb, g), cfg.rician_k,
                       rng);
  const LookAngles aw = look_angles(bs, adv);
  const LookAngles rw = look_angles(radar, adv);
  in.h_aw_nominal = std::sqrt(pathloss(aw.distance, cfg.carrier_hz)) * steer_bs(aw, g);
  in.h_rw_nominal = std::sqrt(pathloss(rw.distance, cfg.carrier_hz)) * steer_upa(rw, g);
  in.c_aw = CMat::Identity(g.bs_antennas, g.bs_antennas);
  in.c_rw = CMat::Identity(g.radar_antennas(), g.radar_antennas());
  in.o_aw = in.o_rw = o;
  in.epsilon = eps;
  in.direction = dir;
  in.a_r = steer_upa(rw, g);
  Mat6 prior = 4.0 * Mat6::Identity();
  prior.bottomRightCorner<3, 3>() = 0.8 * Eigen::Matrix3d::Identity();
  in.c_prior = prior;
  Vec6 alpha;
  alpha << adv.x(), adv.y(), adv.z(), 21.0, -21.0, 0.0;
  in.info = mse_information_term(alpha, radar, cfg.noise_model(), cfg.carrier_hz,
                                 cfg.matched_filter_gain, cfg.noise_radar_w());
  in.mse_max = cfg.mse_max;
  in.p_a = cfg.bs_power_w();
  in.p_r = cfg.radar_power_w();
  in.sigma_b_sq = cfg.noise_user_w();
  in.sigma_w_sq = cfg.noise_adversary_w();
  in.l_threshold = cfg.l_threshold;
  in.max_iterations = cfg.dinkelbach_max_iterations;
  in.randomization_count = cfg.randomization_count;
  in.solver_tol = cfg.robust_solver_tol;
  return in;
}

// shared designs for criteria 4 and 5
struct RobustBattery {
  struct Entry {
    double eps;
    RobustSolution sol;
    RobustDesignInput in;
  };
  std::vector<Entry> entries;
  int failures = 0;
};

const RobustBattery& robust_battery() {
  static RobustBattery battery = [] {
    RobustBattery b;
    const ScenarioConfig cfg = default_scenario();
    RandomStream root(515151);
    for (double eps : {0.01, 0.05, 0.1}) {
      for (int rep = 0; rep < 7; ++rep) {
        RandomStream rng = root.substream(static_cast<std::uint64_t>(eps * 1000) + rep);
        RobustDesignInput in = robust_instance(rng, cfg, eps, 0.45, CovertDirection::d01);
        RandomStream drng = rng.substream(99);
        RobustSolution sol = dinkelbach_solve(in, drng);
        if (sol.status != RobustStatus::ok) {
          ++b.failures;
          continue;
        }
        b.entries.push_back({eps, std::move(sol), std::move(in)});
      }
    }
    return b;
  }();
  return battery;
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion_robust_certificate() {
  const RobustBattery& b = robust_battery();
  int checked = 0, ok = 0;
  double worst_excess = -1.0;
  RandomStream rng(616161);
  for (const auto& e : b.entries) {
    RandomStream srng = rng.substream(checked);
    const CovertCheck chk = check_covert_constraint(e.sol.w, e.sol.q, e.in, 10000, srng);
    const double target = 2.0 * e.eps * e.eps;
    worst_excess = std::max(worst_excess, chk.max_divergence - target);
    const bool eig_path = e.sol.rank_ratio <= 1e-6;
    const bool pass = eig_path ? chk.max_divergence <= target + 1e-9
                               : chk.satisfied_fraction >= 0.99;
    ok += pass;
    ++checked;
  }
  std::ostringstream os;
  os << ok << "/" << checked << " designs certified on 10^4 ellipsoid samples"
     << " (worst divergence excess " << worst_excess << ")";
  if (b.failures) os << "; " << b.failures << " designs failed to solve";
  return {checked > 0 && ok == checked && b.failures == 0, os.str()};
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion_dinkelbach() {
  const RobustBattery& b = robust_battery();
  int fast = 0, monotone = 0, total = 0;
  int worst_updates = 0;
  for (const auto& e : b.entries) {
    const int updates = static_cast<int>(e.sol.l_history.size()) - 2;
    worst_updates = std::max(worst_updates, updates);
    fast += (updates < 10);
    monotone += dinkelbach_ascent_ok(e.sol.l_history, 1e-7, e.in.l_threshold);
    ++total;
  }
  std::ostringstream os;
  os << fast << "/" << total << " designs under 10 iterations (worst " << worst_updates
     << "), " << monotone << "/" << total << " ascent within 1e-7";
  return {total > 0 && fast * 20 >= total * 19 && monotone == total, os.str()};
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion_rate_orderings() {
  const ScenarioConfig cfg = default_scenario();
  const std::vector<double> eps_sweep{0.01, 0.05, 0.1, 0.2};
  const std::vector<double> o_sweep{0.15, 0.45, 0.75};

  std::vector<double> mean_eps(eps_sweep.size(), 0.0);
  std::vector<double> mean_o(o_sweep.size(), 0.0);
  double mean_d01 = 0.0, mean_d10 = 0.0, mean_rob = 0.0, mean_nonrob = 0.0;
  int runs_done = 0, failures = 0;

  RandomStream root(717171);
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    RandomStream base = root.substream(run);
    // one paired scenario instance per run; settings vary on top of it
    auto instance = [&](double eps, double o, CovertDirection dir) {
      RandomStream r = base;  // identical channel draws per run
      return robust_instance(r, cfg, eps, o, dir);
    };
    auto rate_of = [&](const RobustDesignInput& in, bool* okflag) {
      RandomStream drng = base.substream(4242);
      const RobustSolution sol = dinkelbach_solve(in, drng);
      if (sol.status != RobustStatus::ok) {
        *okflag = false;
        return 0.0;
      }
      return achievable_rate(sol.w, sol.q, in.h_ab, in.h_rb, in.sigma_b_sq);
    };

    bool ok = true;
    std::vector<double> r_eps(eps_sweep.size());
    for (size_t i = 0; i < eps_sweep.size(); ++i)
      r_eps[i] = rate_of(instance(eps_sweep[i], 0.45, CovertDirection::d01), &ok);
    const double r_d10 = rate_of(instance(0.05, 0.45, CovertDirection::d10), &ok);
    const double r_nonrob = rate_of(instance(0.05, 0.0, CovertDirection::d01), &ok);
    std::vector<double> r_o(o_sweep.size());
    r_o[1] = r_eps[1];  // o = 0.45 at eps = 0.05 already computed
    r_o[0] = rate_of(instance(0.05, o_sweep[0], CovertDirection::d01), &ok);
    r_o[2] = rate_of(instance(0.05, o_sweep[2], CovertDirection::d01), &ok);

    if (!ok) {
      ++failures;
      continue;
    }
    for (size_t i = 0; i < eps_sweep.size(); ++i) mean_eps[i] += r_eps[i];
    for (size_t i = 0; i < o_sweep.size(); ++i) mean_o[i] += r_o[i];
    mean_d01 += r_eps[1];
    mean_d10 += r_d10;
    mean_rob += r_eps[1];
    mean_nonrob += r_nonrob;
    ++runs_done;
  }
  for (auto& v : mean_eps) v /= runs_done;
  for (auto& v : mean_o) v /= runs_done;
  mean_d01 /= runs_done;
  mean_d10 /= runs_done;
  mean_rob /= runs_done;
  mean_nonrob /= runs_done;

  const double slack = 1e-9;
  bool eps_monotone = true;
  for (size_t i = 1; i < mean_eps.size(); ++i)
    eps_monotone = eps_monotone && (mean_eps[i] >= mean_eps[i - 1] - slack);
  bool o_monotone = true;
  for (size_t i = 1; i < mean_o.size(); ++i)
    o_monotone = o_monotone && (mean_o[i] <= mean_o[i - 1] + slack);
  o_monotone = o_monotone && (mean_o.front() > mean_o.back());
  const bool dir_order = mean_d01 >= mean_d10 - slack;
  const bool rob_order = mean_rob <= mean_nonrob + slack;

  std::ostringstream os;
  os.precision(4);
  os << "rate(eps)=[";
  for (size_t i = 0; i < mean_eps.size(); ++i) os << (i ? ", " : "") << mean_eps[i];
  os << "] nondecr=" << eps_monotone << "; d01 " << mean_d01 << " >= d10 " << mean_d10 << " = "
     << dir_order << "; robust " << mean_rob << " <= nonrobust " << mean_nonrob << " = "
     << rob_order << "; rate(o)=[";
  for (size_t i = 0; i < mean_o.size(); ++i) os << (i ? ", " : "") << mean_o[i];
  os << "] decr=" << o_monotone << "; " << runs_done << "/" << runs << " paired runs";
  return {eps_monotone && dir_order && rob_order && o_monotone && failures == 0 &&
              runs_done == runs,
          os.str()};
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion_baseline_separation() {
  const FreeSpaceStudy& s = free_space_study();
  std::ostringstream os;
  os << "median D01: mrt " << s.median_mrt << " vs proposed " << s.median_perfect
     << " (ratio >= 1e3)";
  const double ratio = s.median_mrt / std::max(s.median_perfect, 1e-300);
  return {ratio >= 1e3, os.str()};
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion_covertness_math() {
  RandomStream rng(818181);
  double worst_id = 0.0;
  bool pinsker_ok = true;
  for (int i = 0; i < 10000; ++i) {
    const double l0 = std::pow(10.0, rng.uniform(-12.0, 0.0));
    const double l1 = l0 * (1.0 + std::pow(10.0, rng.uniform(-6.0, 2.0)));
    const ErrorProbabilities e = error_probabilities(l0, l1);
    const double vt = oracle::total_variation_numeric(l0, l1);
    worst_id = std::max(worst_id, std::abs(e.xi - (1.0 - vt)));
    auto [d01, d10] = kl_divergences(l0, l1);
    pinsker_ok = pinsker_ok && vt <= std::sqrt(d01 / 2.0) + 1e-9 &&
                 vt <= std::sqrt(d10 / 2.0) + 1e-9;
  }
  std::ostringstream os;
  os << "max |xi - (1 - V_T)| = " << worst_id << " (<= 2e-6) on 10^4 pairs, Pinsker bounds "
     << (pinsker_ok ? "hold" : "violated");
  return {worst_id <= 2e-6 && pinsker_ok, os.str()};
}

// ---------------------------------------------------------------- criterion 9
Outcome criterion_tracking_feasibility() {
  const FreeSpaceStudy& s = free_space_study();
  std::ostringstream os;
  os << "per-slot tracking constraint feasible fraction " << s.mse_feasible_fraction
     << " (>= 0.99) at MSE_max = 10";
  return {s.mse_feasible_fraction >= 0.99, os.str()};
}

// --------------------------------------------------------------- criterion 10
Outcome criterion_determinism() {
  ScenarioConfig cfg = default_scenario();
  cfg.runs = 2;
  cfg.period_s = 2.0;  // 10 slots
  cfg.seed = 4321;
  cfg.schemes = {Scheme::perfect, Scheme::mrt_baseline};

  const std::string da = "acceptance_det_a", db = "acceptance_det_b";
  std::filesystem::remove_all(da);
  std::filesystem::remove_all(db);
  emit_results(monte_carlo(cfg), "csv", da);
  emit_results(monte_carlo(cfg), "csv", db);

  size_t files = 0;
  bool identical = true;
  for (const auto& entry : std::filesystem::directory_iterator(da)) {
    ++files;
    const std::string name = entry.path().filename().string();
    std::ifstream fa(da + "/" + name, std::ios::binary), fb(db + "/" + name, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    identical = identical && sa.str() == sb.str();
  }
  std::ostringstream os;
  os << files << " output files byte-identical across two executions: "
     << (identical ? "yes" : "no");
  return {files > 0 && identical, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "conic solver accuracy on planted programs", criterion_solver},
      {2, "EKF Jacobian and posterior-form consistency", criterion_ekf},
      {3, "perfect-CSI covertness at scenario scale", criterion_perfect_covertness},
      {4, "robust covertness certificate", criterion_robust_certificate},
      {5, "Dinkelbach convergence", criterion_dinkelbach},
      {6, "rate orderings across thresholds and radii", criterion_rate_orderings},
      {7, "baseline separation", criterion_baseline_separation},
      {8, "detection-error identities", criterion_covertness_math},
      {9, "tracking constraint feasibility", criterion_tracking_feasibility},
      {10, "bit-identical reruns", criterion_determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_pass = true;
  for (const auto& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    Outcome out;
    const double secs = wall_seconds([&] { out = c.fn(); });
    std::printf("[%s] criterion %2d (%s): %s  [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id,
                c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
