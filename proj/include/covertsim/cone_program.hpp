#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace covertsim {

enum class ConeKind { nonneg, soc, psd, free_var };

struct ConeBlock {
  ConeKind kind;
  int size;  // vector length for nonneg/soc/free, matrix dimension for psd
};

// Length of the vectorized block: psd blocks use scaled (svec) storage so
// Euclidean inner products equal Frobenius inner products.
int cone_vec_len(const ConeBlock& b);

// svec index of matrix entry (r, c), r <= c, within a psd block of dim n.
inline int svec_index(int r, int c) { return c * (c + 1) / 2 + r; }

// Standard-form conic program:  minimize c'x  s.t.  Ax = b,  x in K,
// where K is the ordered product of the declared cone blocks.  All data is
// real; complex constraints are embedded by the caller.
class ConeProgram {
 public:
  explicit ConeProgram(std::vector<ConeBlock> cones);

  int var_dim() const { return var_dim_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_blocks() const { return static_cast<int>(cones_.size()); }
  const std::vector<ConeBlock>& cones() const { return cones_; }
  int block_offset(int j) const { return offsets_[j]; }

  void set_objective(const Eigen::VectorXd& c);
  const Eigen::VectorXd& objective() const { return c_; }

  // Sparse equality row over global vectorized coordinates.
  int add_row(std::vector<std::pair<int, double>> entries, double rhs);

  const std::vector<std::vector<std::pair<int, double>>>& rows() const { return rows_; }
  const Eigen::VectorXd rhs() const;

  Eigen::MatrixXd dense_matrix() const;   // A, row-major semantics
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;            // A x
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;  // A'y

  // Debug dump (documented text schema: dimensions, cone list, dense data)
  // for cross-checking against external solvers.
  void dump(std::ostream& os) const;
  void dump_file(const std::string& path) const;

 private:
  std::vector<ConeBlock> cones_;
  std::vector<int> offsets_;
  int var_dim_ = 0;
  Eigen::VectorXd c_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<double> b_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iters };

const char* to_string(SolveStatus s);

struct ConeSolution {
  SolveStatus status = SolveStatus::max_iters;
  Eigen::VectorXd x;  // primal cone point (or dual-infeasibility certificate)
  Eigen::VectorXd y;  // equality multipliers (or primal-infeasibility certificate)
  Eigen::VectorXd s;  // dual slack, s = c - A'y at optimality
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double objective = 0.0;
  double res_primal = 0.0;
  double res_dual = 0.0;
  double res_gap = 0.0;
  int iterations = 0;
  double tau = 0.0, kappa = 0.0;
  std::string note;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 200;       // conventional safe default
  double step_fraction = 0.99;    // fraction of the step to the cone boundary
};

ConeSolution solve(const ConeProgram& p, double tol);
ConeSolution solve(const ConeProgram& p, const SolverOptions& opts);

struct KktResiduals {
  double primal = 0.0;  // ||Ax - b|| / (1 + ||b||) plus primal cone violation
  double dual = 0.0;    // ||A'y + s - c|| / (1 + ||c||) plus dual cone violation
  double gap = 0.0;     // |c'x - b'y| / (1 + |c'x| + |b'y|)
};

// Independent recomputation of the optimality residuals from raw problem data.
KktResiduals verify_kkt(const ConeProgram& p, const ConeSolution& sol);

}  // namespace covertsim
