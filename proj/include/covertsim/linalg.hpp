#pragma once

#include <Eigen/Dense>
#include <complex>

namespace covertsim {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Complex Hermitian matrix with symmetrization enforced on construction,
// (H + H^H)/2, so downstream solvers can rely on exact symmetry.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMat& any) : m_(0.5 * (any + any.adjoint())) {}

  static HermitianMatrix zero(int n) { return HermitianMatrix(CMat::Zero(n, n)); }
  static HermitianMatrix identity(int n) { return HermitianMatrix(CMat::Identity(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& mat() const { return m_; }

 private:
  CMat m_;
};

// [[Re(H), -Im(H)], [Im(H), Re(H)]].  H >= 0 iff the embedding >= 0; each
// eigenvalue of H appears twice in the embedding.
RMat embed_complex_to_real(const CMat& h);

// Inverse of the embedding by block averaging; exact on structured inputs and
// the natural projection otherwise.
CMat unembed_real_to_complex(const RMat& e);

struct SymEigResult {
  RVec values;   // descending
  RMat vectors;  // columns match values
};

// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
SymEigResult jacobi_eig_sym(const RMat& a, int max_sweeps = 64);

struct HermEigResult {
  RVec values;   // descending, real
  CMat vectors;  // unit columns, phase-fixed (largest entry real nonnegative)
};

// Hermitian eigendecomposition through the real embedding (Jacobi inside).
HermEigResult eig_hermitian(const CMat& h);

// Smallest eigenvalue; throws std::invalid_argument if the input deviates
// from Hermitian beyond tolerance.
double min_eigenvalue(const CMat& h, double herm_tol = 1e-9);

struct Rank1Factor {
  CVec w;        // sqrt(lambda_max) * u_max, phase-fixed
  double ratio;  // lambda_2 / lambda_1 (clamped at 0), 0 for n == 1
};

// Dominant rank-1 factor of a (near-)PSD Hermitian matrix.  Callers treat
// ratio <= 1e-6 as rank-1.
Rank1Factor dominant_rank1_factor(const CMat& w);

// Largest-magnitude entry made real and nonnegative.
void fix_phase(CVec& v);

}  // namespace covertsim
