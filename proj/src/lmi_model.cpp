#include "covertsim/lmi_model.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace covertsim {

int LmiModel::add_var(double obj_coeff) {
  obj_.push_back(obj_coeff);
  return static_cast<int>(obj_.size()) - 1;
}

void LmiModel::add_obj(int var, double coeff) { obj_.at(var) += coeff; }

int LmiModel::add_real_block(int dim) {
  blocks_.push_back({false, false, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

int LmiModel::add_complex_block(int dim) {
  blocks_.push_back({true, false, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

int LmiModel::add_nonneg_block(int dim) {
  blocks_.push_back({false, true, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

void LmiModel::add_real_entry(int block, int r, int c, int var, double coeff) {
  add_complex_entry(block, r, c, var, Cplx(coeff, 0.0));
}

void LmiModel::add_complex_entry(int block, int r, int c, int var, Cplx coeff) {
  const BlockInfo& b = blocks_.at(block);
  if (r < 0 || c < 0 || r >= b.dim || c >= b.dim)
    throw std::invalid_argument("lmi entry out of block range");
  if (b.nonneg_ && r != c) throw std::invalid_argument("nonneg blocks are diagonal");
  if (r == c && std::abs(coeff.imag()) > 1e-14 * (1.0 + std::abs(coeff.real())))
    throw std::invalid_argument("diagonal entries must be real");
  if (var != kConstant) obj_.at(var);  // range check
  entries_.push_back({block, r, c, var, coeff});
}

void LmiModel::add_complex_matrix(int block, int r0, int c0, int var, const CMat& h,
                                  double scale) {
  for (int c = 0; c < h.cols(); ++c)
    for (int r = 0; r < h.rows(); ++r) {
      if (r0 + r > c0 + c) continue;  // upper triangle of the block
      const Cplx v = scale * h(r, c);
      if (std::abs(v) == 0.0) continue;
      add_complex_entry(block, r0 + r, c0 + c, var, v);
    }
}

void LmiModel::add_real_matrix(int block, int r0, int c0, int var, const RMat& h, double scale) {
  for (int c = 0; c < h.cols(); ++c)
    for (int r = 0; r < h.rows(); ++r) {
      if (r0 + r > c0 + c) continue;
      const double v = scale * h(r, c);
      if (v == 0.0) continue;
      add_real_entry(block, r0 + r, c0 + c, var, v);
    }
}

ConeProgram LmiModel::build() const {
  const double rt2 = std::sqrt(2.0);
  std::vector<ConeBlock> cones;
  std::vector<int> offsets;
  int dim = 0;
  for (const auto& b : blocks_) {
    offsets.push_back(dim);
    ConeBlock cb;
    if (b.nonneg_) cb = {ConeKind::nonneg, b.dim};
    else cb = {ConeKind::psd, b.complex_ ? 2 * b.dim : b.dim};
    cones.push_back(cb);
    dim += cone_vec_len(cb);
  }

  ConeProgram prog(cones);

  // Accumulate svec coordinates per variable (rows) and the constant (c).
  const int nv = num_vars();
  std::vector<std::map<int, double>> rows(nv);
  std::map<int, double> constant;

  auto put = [&](int var, int coord, double val) {
    if (val == 0.0) return;
    if (var == kConstant) constant[coord] += val;
    else rows[var][coord] -= val;  // dual reads c - A'y
  };

  for (const auto& e : entries_) {
    const BlockInfo& b = blocks_[e.block];
    const int off = offsets[e.block];
    if (b.nonneg_) {
      put(e.var, off + e.r, e.coeff.real());
      continue;
    }
    if (!b.complex_) {
      const double v = e.coeff.real();
      if (e.r == e.c) put(e.var, off + svec_index(e.r, e.r), v);
      else put(e.var, off + svec_index(e.r, e.c), rt2 * v);
      continue;
    }
    // Hermitian embedding [[Re, -Im], [Im, Re]] of dimension 2n
    const int n = b.dim;
    const double re = e.coeff.real(), im = e.coeff.imag();
    if (e.r == e.c) {
      put(e.var, off + svec_index(e.r, e.r), re);
      put(e.var, off + svec_index(n + e.r, n + e.r), re);
    } else {
      put(e.var, off + svec_index(e.r, e.c), rt2 * re);
      put(e.var, off + svec_index(n + e.r, n + e.c), rt2 * re);
      // Im block: E(n+r, c) = im, E(n+c, r) = -im (skew), mirrored upper part
      put(e.var, off + svec_index(e.c, n + e.r), rt2 * im);
      put(e.var, off + svec_index(e.r, n + e.c), -rt2 * im);
    }
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(prog.var_dim());
  for (const auto& [coord, val] : constant) c(coord) = val;
  prog.set_objective(c);

  for (int i = 0; i < nv; ++i) {
    std::vector<std::pair<int, double>> row(rows[i].begin(), rows[i].end());
    if (row.empty())
      throw std::invalid_argument("lmi variable does not appear in any block");
    prog.add_row(std::move(row), obj_[i]);
  }
  return prog;
}

LmiModel::Status LmiModel::interpret(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return Status::optimal;
    // the emitted program is the dual, so certificates swap roles
    case SolveStatus::infeasible: return Status::unbounded;
    case SolveStatus::unbounded: return Status::infeasible;
    case SolveStatus::max_iters: return Status::inaccurate;
  }
  return Status::inaccurate;
}

std::vector<double> LmiModel::thetas(const ConeSolution& sol) const {
  std::vector<double> t(num_vars(), 0.0);
  for (int i = 0; i < num_vars() && i < sol.y.size(); ++i) t[i] = sol.y(i);
  return t;
}

CMat LmiModel::slack_matrix(const ConeProgram& p, const ConeSolution& sol, int block) const {
  const BlockInfo& b = blocks_.at(block);
  const int off = p.block_offset(block);
  if (b.nonneg_) {
    CMat out = CMat::Zero(b.dim, b.dim);
    for (int i = 0; i < b.dim; ++i) out(i, i) = sol.s(off + i);
    return out;
  }
  const int d = b.complex_ ? 2 * b.dim : b.dim;
  RMat m(d, d);
  const double irt2 = 1.0 / std::sqrt(2.0);
  for (int cc = 0; cc < d; ++cc)
    for (int rr = 0; rr <= cc; ++rr) {
      const double v = sol.s(off + svec_index(rr, cc));
      m(rr, cc) = (rr == cc) ? v : v * irt2;
      m(cc, rr) = m(rr, cc);
    }
  if (!b.complex_) return m.cast<Cplx>();
  return unembed_real_to_complex(m);
}

}  // namespace covertsim
