#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "covertsim/covertness.hpp"
#include "covertsim/design_robust.hpp"

#include <cmath>

using namespace covertsim;

namespace {

const double kFc = 6e9, kGmf = 1000.0;

// Scenario-scale robust design instance: separated radar and BS, low-altitude
// adversary, composite links with identity-shaped uncertainty.
RobustDesignInput make_input(RandomStream& rng, double eps, double o,
                             CovertDirection dir = CovertDirection::d01) {
  ArrayGeometry g;
  const Vec3 radar(0, 0, 30), bs(1200, 50, 10), user(1000, 100, 0);
  Vec3 adv(1100.0 + rng.uniform(-100, 100), 75.0 + rng.uniform(-60, 60), 60.0);

  RobustDesignInput in;
  in.h_ab = gen_rayleigh_user(g.bs_antennas, (user - bs).norm(), kFc, rng);
  const LookAngles rb = look_angles(radar, user);
  in.h_rb = gen_rician((user - radar).norm(), kFc, steer_upa(rb, g), 10.0, rng);

  const LookAngles aw = look_angles(bs, adv);
  const LookAngles rw = look_angles(radar, adv);
  in.h_aw_nominal = std::sqrt(pathloss(aw.distance, kFc)) * steer_bs(aw, g);
  in.h_rw_nominal = std::sqrt(pathloss(rw.distance, kFc)) * steer_upa(rw, g);
  in.c_aw = CMat::Identity(g.bs_antennas, g.bs_antennas);
  in.c_rw = CMat::Identity(g.radar_antennas(), g.radar_antennas());
  in.o_aw = in.o_rw = o;
  in.epsilon = eps;
  in.direction = dir;

  in.a_r = steer_upa(rw, g);
  Mat6 prior = 4.0 * Mat6::Identity();
  prior.bottomRightCorner<3, 3>() = 0.8 * Eigen::Matrix3d::Identity();
  in.c_prior = prior;

  MeasurementNoiseModel m;
  const double gamma_mid = 2.6e-5;
  m.a1 = 4.0 / (299792458.0 * 299792458.0) * gamma_mid;
  m.a2 = 0.25 * gamma_mid;
  m.a3 = 7.6e-7 * gamma_mid;
  m.a4 = 7.6e-7 * gamma_mid;
  Vec6 alpha;
  alpha << adv.x(), adv.y(), adv.z(), 21.0, -21.0, 0.0;
  in.info = mse_information_term(alpha, radar, m, kFc, kGmf, 1e-12);
  return in;
}

}  // namespace

TEST_CASE("covert caps: the d10 direction is strictly tighter") {
  for (double eps : {0.01, 0.05, 0.1, 0.2}) {
    const double k01 = covert_kappa(eps, CovertDirection::d01);
    const double k10 = covert_kappa(eps, CovertDirection::d10);
    CHECK(k10 > 0.0);
    CHECK(k10 < k01);
  }
}

TEST_CASE("inner sdp: zero uncertainty and a huge cap recover mrt") {
  RandomStream rng(3);
  RobustDesignInput in = make_input(rng, 0.2, 0.0);
  // effectively unconstrained covertness
  const InnerSdpResult r = solve_inner_sdp(in, 0.0, 1e9);
  REQUIRE(r.feasible);
  const double mrt_power = in.p_a * in.h_ab.squaredNorm();
  CHECK(r.numerator == doctest::Approx(mrt_power).epsilon(1e-4));
  CHECK(r.w_cov.trace().real() <= in.p_a * (1.0 + 1e-6));
}

TEST_CASE("inner sdp: penalized jamming keeps the objective bounded") {
  RandomStream rng(5);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  const double l = 1e6;  // dominating denominator weight
  const InnerSdpResult r = solve_inner_sdp(in, l, covert_kappa(0.05, CovertDirection::d01));
  REQUIRE(r.feasible);
  // jamming leakage is driven to (numerically) zero, never negative
  const double leak_floor = 1e-6 * in.h_rb.squaredNorm() * in.p_r;
  CHECK(r.denominator >= in.sigma_b_sq - leak_floor);
  CHECK(r.objective <= r.numerator - l * (in.sigma_b_sq - leak_floor));
}

TEST_CASE("inner sdp: solution certifies over the whole ellipsoid") {
  RandomStream rng(7);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  const double kappa = covert_kappa(in.epsilon, in.direction);
  const InnerSdpResult r = solve_inner_sdp(in, 0.0, kappa);
  REQUIRE(r.feasible);

  RandomStream check_rng(1234);
  const CovertCheck chk = check_covert_constraint_matrix(r.w_cov, r.q, in, 4000, check_rng);
  CHECK(chk.satisfied_fraction >= 1.0);
  CHECK(chk.max_divergence <= 2.0 * in.epsilon * in.epsilon + 1e-9);

  // power and psd sanity
  CHECK(r.w_cov.trace().real() <= in.p_a * (1.0 + 1e-6));
  CHECK(r.q.trace().real() <= in.p_r * (1.0 + 1e-6));
  CHECK(min_eigenvalue(r.w_cov) >= -1e-12 * (1.0 + r.w_cov.norm()));
  CHECK(min_eigenvalue(r.q) >= -1e-12 * (1.0 + r.q.norm()));
}

TEST_CASE("dinkelbach: constant denominator converges immediately") {
  RandomStream rng(11);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  in.h_rb = CVec::Zero(in.h_rb.size());  // force a constant denominator

  RandomStream drng(99);
  const RobustSolution sol = dinkelbach_solve(in, drng);
  REQUIRE(sol.status == RobustStatus::ok);
  // l0, l1, then at most two Dinkelbach updates to the fixed point
  CHECK(sol.l_history.size() <= 4);
  const double expect = (in.h_ab.adjoint() * sol.w_cov * in.h_ab)(0, 0).real() / in.sigma_b_sq;
  CHECK(sol.final_l == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("dinkelbach: scenario-scale run converges fast and certifies") {
  RandomStream rng(13);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  RandomStream drng(7);
  const RobustSolution sol = dinkelbach_solve(in, drng);
  REQUIRE(sol.status == RobustStatus::ok);

  // Dinkelbach updates (entries beyond l0, l1) are monotone nondecreasing
  CHECK(dinkelbach_ascent_ok(sol.l_history, 1e-7, in.l_threshold));
  CHECK(sol.l_history.size() - 2 < 10);  // fewer than 10 updates

  // extracted beamformer matches the fixed point when the extraction is tight
  const double sinr =
      std::norm(in.h_ab.dot(sol.w)) /
      ((in.h_rb.adjoint() * sol.q * in.h_rb)(0, 0).real() + in.sigma_b_sq);
  if (sol.rank_ratio <= 1e-6) {
    CHECK(sinr == doctest::Approx(sol.final_l).epsilon(0.05));
  }

  // the covert certificate holds on fresh uncertainty samples
  RandomStream check_rng(4321);
  const CovertCheck chk = check_covert_constraint(sol.w, sol.q, in, 4000, check_rng);
  // exact worst-case backoff makes the certificate hold on all samples
  CHECK(chk.max_divergence <= 2.0 * in.epsilon * in.epsilon + 1e-9);

  // power budget respected by the extraction
  CHECK(sol.w.squaredNorm() <= in.p_a * (1.0 + 1e-9));
}

TEST_CASE("direction and robustness orderings hold per seed") {
  RandomStream rng(17);
  RobustDesignInput base = make_input(rng, 0.05, 0.45);

  RandomStream r1(1), r2(1), r3(1);
  const RobustSolution d01 = dinkelbach_solve(base, r1);

  RobustDesignInput d10in = base;
  d10in.direction = CovertDirection::d10;
  const RobustSolution d10 = dinkelbach_solve(d10in, r2);

  RobustDesignInput nonrob = base;
  nonrob.o_aw = nonrob.o_rw = 0.0;
  const RobustSolution nr = dinkelbach_solve(nonrob, r3);

  REQUIRE(d01.status == RobustStatus::ok);
  REQUIRE(d10.status == RobustStatus::ok);
  REQUIRE(nr.status == RobustStatus::ok);

  // smaller cap => smaller optimum; zero uncertainty => larger optimum
  CHECK(d10.final_l <= d01.final_l * (1.0 + 1e-6));
  CHECK(d01.final_l <= nr.final_l * (1.0 + 1e-6));
}

TEST_CASE("gaussian randomization: more candidates never hurt") {
  RandomStream rng(23);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  const double kappa = covert_kappa(in.epsilon, in.direction);
  const InnerSdpResult r = solve_inner_sdp(in, 0.0, kappa);
  REQUIRE(r.feasible);

  RandomStream ra(77), rb(77);
  const CVec w1 = gaussian_randomization(r.w_cov, in, r.q, kappa, ra, 1);
  const CVec w100 = gaussian_randomization(r.w_cov, in, r.q, kappa, rb, 100);
  CHECK(std::norm(in.h_ab.dot(w100)) >= std::norm(in.h_ab.dot(w1)) * (1.0 - 1e-12));

  // nominal covert constraint always holds for the returned candidate
  auto [l0, l1] = lambdas(w100, r.q, in.h_aw_nominal, in.h_rw_nominal, in.sigma_w_sq);
  CHECK(l1 - l0 <= kappa * l0 * (1.0 + 1e-9));
  CHECK(w100.squaredNorm() <= in.p_a * (1.0 + 1e-9));
}

TEST_CASE("impossible tracking accuracy reports infeasible with a probe") {
  RandomStream rng(29);
  RobustDesignInput in = make_input(rng, 0.05, 0.45);
  in.mse_max = 1e-4;
  RandomStream drng(5);
  const RobustSolution sol = dinkelbach_solve(in, drng);
  CHECK(sol.status == RobustStatus::infeasible);
  CHECK(!sol.message.empty());
}
