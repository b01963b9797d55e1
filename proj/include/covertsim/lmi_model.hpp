#pragma once

#include "covertsim/cone_program.hpp"
#include "covertsim/linalg.hpp"

#include <vector>

namespace covertsim {

// Linear-matrix-inequality model over real scalar variables theta:
//
//   maximize  g' theta
//   s.t.      F0_j + sum_i theta_i F_ij  >= 0   for every declared block j.
//
// build() emits the standard-form conic program whose dual this is, which
// keeps the interior-point Schur complement at dim(theta); thetas() reads the
// optimizer back out of the dual multipliers.  Complex Hermitian blocks are
// embedded onto real symmetric blocks on build.
class LmiModel {
 public:
  static constexpr int kConstant = -1;

  int add_var(double obj_coeff = 0.0);
  void add_obj(int var, double coeff);
  int num_vars() const { return static_cast<int>(obj_.size()); }

  int add_real_block(int dim);     // real symmetric PSD slack
  int add_complex_block(int dim);  // Hermitian PSD slack (embedded 2x)
  int add_nonneg_block(int dim = 1);

  // F_block(r, c) += coeff * theta_var; var == kConstant accumulates into F0.
  // Off-diagonal complex entries imply their Hermitian mirror; add each
  // logical entry once.
  void add_real_entry(int block, int r, int c, int var, double coeff);
  void add_complex_entry(int block, int r, int c, int var, Cplx coeff);

  // Accumulate scale * H (Hermitian) into a complex block at offset (r0, c0).
  void add_complex_matrix(int block, int r0, int c0, int var, const CMat& h, double scale = 1.0);
  void add_real_matrix(int block, int r0, int c0, int var, const RMat& h, double scale = 1.0);

  ConeProgram build() const;

  enum class Status { optimal, infeasible, unbounded, inaccurate };
  static Status interpret(SolveStatus s);

  std::vector<double> thetas(const ConeSolution& sol) const;
  double objective(const ConeSolution& sol) const { return sol.dual_obj; }

  // Slack of a declared block at the solution (complex blocks de-embedded).
  CMat slack_matrix(const ConeProgram& p, const ConeSolution& sol, int block) const;

 private:
  struct Entry {
    int block, r, c, var;
    Cplx coeff;
  };
  struct BlockInfo {
    bool complex_ = false;
    bool nonneg_ = false;
    int dim = 0;
  };
  std::vector<double> obj_;
  std::vector<BlockInfo> blocks_;
  std::vector<Entry> entries_;
};

}  // namespace covertsim
