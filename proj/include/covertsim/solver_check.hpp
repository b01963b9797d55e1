#pragma once

#include "covertsim/cone_program.hpp"
#include "covertsim/rng.hpp"

#include <string>
#include <vector>

namespace covertsim {

// A random feasible conic program generated from a known strictly
// complementary primal-dual pair, so the optimal value is known exactly.
struct PlantedProgram {
  ConeProgram program;
  Eigen::VectorXd x_star;
  Eigen::VectorXd y_star;
  Eigen::VectorXd s_star;
  double opt_value = 0.0;
};

struct PlantedSpec {
  int max_psd_dim = 25;
  int max_soc_dim = 10;
  int max_nonneg = 12;
  int max_rows = 24;
  bool allow_free = true;
};

PlantedProgram gen_planted_program(RandomStream& rng, const PlantedSpec& spec = {});

struct SelfCheckResult {
  int programs = 0;
  int passed = 0;
  double max_obj_rel_err = 0.0;
  double max_kkt_residual = 0.0;
  double worst_ms = 0.0;
  double total_ms = 0.0;
  std::vector<std::string> failures;
  bool ok() const { return passed == programs; }
};

// Solves `programs` random planted instances and checks objective error and
// KKT residuals against fixed thresholds (1e-6 relative, 1e-7).
SelfCheckResult run_solver_selfcheck(int programs, std::uint64_t seed,
                                     const PlantedSpec& spec = {});

}  // namespace covertsim
