#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "covertsim/sim.hpp"

#include <cmath>

using namespace covertsim;

TEST_CASE("trajectory kinematics") {
  ScenarioConfig cfg = default_scenario();
  RandomStream rng(5);

  // zero-width increment interval: straight-line flight
  const auto straight = gen_trajectory_interval(cfg, 0.0, 0.0, rng);
  const Vec3 dir0 = (straight[1] - straight[0]).head<3>().normalized();
  for (size_t k = 2; k < straight.size(); ++k) {
    const Vec3 step = (straight[k] - straight[k - 1]).head<3>();
    CHECK(step.normalized().dot(dir0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // consecutive positions are speed * dt apart
  RandomStream rng2(6);
  const auto traj = gen_trajectory(cfg, rng2);
  for (size_t k = 1; k < traj.size(); ++k) {
    const double step = (traj[k].head<3>() - traj[k - 1].head<3>()).norm();
    CHECK(step == doctest::Approx(cfg.speed_mps * cfg.slot_duration_s).epsilon(1e-12));
    CHECK(traj[k](2) == doctest::Approx(cfg.initial_position.z()));  // constant altitude
  }
}

TEST_CASE("circling trajectories stay in a bounded annulus") {
  ScenarioConfig cfg = default_scenario();
  cfg.motion = MotionKind::circling;
  // mean turn rate pi/72 per slot at 6 m arc length -> radius ~ 137.5 m
  const double radius = cfg.speed_mps * cfg.slot_duration_s / (M_PI / 72.0);
  for (int seed = 0; seed < 5; ++seed) {
    RandomStream rng(seed);
    const auto traj = gen_trajectory(cfg, rng);
    Vec3 centroid = Vec3::Zero();
    for (const auto& s : traj) centroid += s.head<3>();
    centroid /= static_cast<double>(traj.size());
    double dmax = 0.0;
    for (const auto& s : traj) dmax = std::max(dmax, (s.head<3>() - centroid).norm());
    CHECK(dmax < 2.5 * radius);
    CHECK(dmax > 0.3 * radius);
  }
}

TEST_CASE("perfect scheme under free-space truth is covert") {
  ScenarioConfig cfg = default_scenario();
  cfg.period_s = 8.0;  // 40 slots
  cfg.schemes = {Scheme::perfect};
  RandomStream master(cfg.seed);
  const EpisodeResult ep = run_episode(cfg, Scheme::perfect, master.substream(0));
  REQUIRE(ep.slots.size() == 40);

  int tiny_d01 = 0;
  for (const auto& r : ep.slots) {
    CHECK(r.xi >= 0.999);
    if (r.d01 < 1e-8) ++tiny_d01;
    CHECK(r.design_feasible);
  }
  CHECK(tiny_d01 >= 38);  // ~criterion scale on a single episode
}

TEST_CASE("mrt baseline leaks detectably") {
  ScenarioConfig cfg = default_scenario();
  cfg.period_s = 6.0;
  RandomStream master(cfg.seed);
  const EpisodeResult ep = run_episode(cfg, Scheme::mrt_baseline, master.substream(0));
  int positive = 0;
  for (const auto& r : ep.slots)
    if (r.d01 > 1e-9) ++positive;
  // generic slots leak; an occasional near-orthogonal fade is possible
  CHECK(positive * 10 >= static_cast<int>(ep.slots.size()) * 9);
}

TEST_CASE("episodes are bit-deterministic in the seed") {
  ScenarioConfig cfg = default_scenario();
  cfg.period_s = 3.0;
  RandomStream a(cfg.seed), b(cfg.seed), c(cfg.seed + 1);
  const EpisodeResult e1 = run_episode(cfg, Scheme::perfect, a.substream(3));
  const EpisodeResult e2 = run_episode(cfg, Scheme::perfect, b.substream(3));
  const EpisodeResult e3 = run_episode(cfg, Scheme::perfect, c.substream(3));
  bool identical = true, differs = false;
  for (size_t k = 0; k < e1.slots.size(); ++k) {
    identical = identical && e1.slots[k].rate == e2.slots[k].rate &&
                e1.slots[k].d01 == e2.slots[k].d01 && e1.slots[k].mse == e2.slots[k].mse;
    differs = differs || e1.slots[k].rate != e3.slots[k].rate;
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("tracking stays bounded under both motion models") {
  for (MotionKind kind : {MotionKind::circling, MotionKind::erratic}) {
    ScenarioConfig cfg = default_scenario();
    cfg.motion = kind;
    cfg.period_s = 20.0;
    int ok = 0, total = 0;
    for (int seed = 0; seed < 3; ++seed) {
      RandomStream master(seed);
      const EpisodeResult ep = run_episode(cfg, Scheme::perfect, master.substream(0));
      double worst_tail = 0.0;
      for (size_t k = ep.slots.size() / 2; k < ep.slots.size(); ++k)
        worst_tail = std::max(worst_tail, std::sqrt(ep.slots[k].pos_err_sq));
      ++total;
      if (worst_tail < 50.0) ++ok;
    }
    CHECK(ok == total);
  }
}

TEST_CASE("tracking mse follows the constraint as it tightens") {
  ScenarioConfig tight = default_scenario();
  tight.period_s = 8.0;
  tight.mse_max = 6.0;
  ScenarioConfig loose = tight;
  loose.mse_max = 12.0;

  double mean_tight = 0.0, mean_loose = 0.0;
  int n = 0;
  for (int seed = 0; seed < 3; ++seed) {
    RandomStream a(seed), b(seed);
    const EpisodeResult et = run_episode(tight, Scheme::perfect, a.substream(0));
    const EpisodeResult el = run_episode(loose, Scheme::perfect, b.substream(0));
    for (size_t k = 5; k < et.slots.size(); ++k) {
      mean_tight += et.slots[k].mse;
      mean_loose += el.slots[k].mse;
      ++n;
    }
  }
  mean_tight /= n;
  mean_loose /= n;
  CHECK(mean_tight < mean_loose);
  CHECK(mean_tight <= 6.0 * 1.05);
}

TEST_CASE("robust episodes keep the divergence under the design threshold") {
  ScenarioConfig cfg = default_scenario();
  cfg.csi = CsiModel::composite;
  cfg.initial_position = Vec3(950.0, 300.0, 60.0);  // low altitude, multipath
  cfg.epsilon = 0.05;
  cfg.o_aw = cfg.o_rw = 0.45;
  cfg.period_s = 2.0;  // 10 slots
  const double cap = 2.0 * cfg.epsilon * cfg.epsilon;

  int ok = 0, total = 0;
  for (int seed = 0; seed < 2; ++seed) {
    RandomStream master(seed);
    const EpisodeResult ep = run_episode(cfg, Scheme::robust_d01, master.substream(0));
    for (const auto& r : ep.slots) {
      ++total;
      if (r.design_feasible && r.d01 <= cap + 1e-9) ++ok;
      CHECK(r.design_feasible);
    }
  }
  // certified over the modeled uncertainty; tracking error eats a little slack
  CHECK(ok * 20 >= total * 19);
}

TEST_CASE("isac co-located setup runs the same pipeline at lower rate") {
  ScenarioConfig sep = default_scenario();
  sep.period_s = 5.0;
  sep.runs = 3;
  sep.schemes = {Scheme::perfect};

  ScenarioConfig isac = sep;
  isac.isac = true;

  const AggregateResult a = monte_carlo(sep);
  const AggregateResult b = monte_carlo(isac);
  const double rate_sep = a.schemes[0].mean(&SlotRecord::rate);
  const double rate_isac = b.schemes[0].mean(&SlotRecord::rate);
  CHECK(rate_isac < rate_sep);
  CHECK(rate_isac > 0.0);
}
