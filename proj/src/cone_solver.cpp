#include "covertsim/cone_program.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <vector>

// Homogeneous self-dual embedding, primal-dual path following with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  The
// problems here are small and dense-ish, so each iteration forms the Schur
// complement M = A H A' explicitly and factors it with a dense Cholesky.

namespace covertsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct MatEntry {
  int r, c;
  double v;  // matrix-units value (svec scaling removed)
};

struct BlockRowData {
  int row = -1;
  std::vector<std::pair<int, double>> svec;  // block-local svec coords
  std::vector<MatEntry> full;                // full symmetric entry list (psd)
};

struct Block {
  ConeKind kind;
  int size;    // matrix dim for psd, vector length otherwise
  int offset;  // into internal variable vector
  int vlen;
  std::vector<BlockRowData> rows;  // rows touching this block

  // scaling state, refreshed every iteration
  Vec d;                  // nonneg: x_i / s_i
  Mat W, Winv, H;         // soc
  Mat R, Rinv, T;         // psd
  Vec lambda;             // scaled point (psd: svec of diag(sigma))
  Vec sigma;              // psd eigenvalues of the scaled point
};

Mat mat_of_svec(int n, const double* v) {
  Mat m(n, n);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r, ++k) {
      if (r == c) {
        m(r, c) = v[k];
      } else {
        m(r, c) = v[k] * inv_rt2;
        m(c, r) = m(r, c);
      }
    }
  return m;
}

void svec_of_mat(const Mat& m, double* out) {
  const int n = static_cast<int>(m.rows());
  const double rt2 = std::sqrt(2.0);
  int k = 0;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r, ++k) out[k] = (r == c) ? m(r, c) : rt2 * m(r, c);
}

// Internal reformulation: free blocks become second-order cones with one
// synthetic head coordinate that appears in neither A nor c.
struct Internal {
  std::vector<Block> blocks;
  std::vector<int> ext2int;  // external coordinate -> internal coordinate
  int dim = 0;
  double degree = 0.0;
  Vec c;
  Vec b;
  std::vector<std::vector<std::pair<int, double>>> rows;
  Vec row_scale;  // rows were multiplied by this (equilibration)
  double sigma_b = 1.0, sigma_c = 1.0;  // scalar data normalization
  double bnorm_ext = 0.0, cnorm_ext = 0.0;
  int m = 0;

  Vec to_external(const Vec& xint, int ext_dim) const {
    Vec xe(ext_dim);
    for (int i = 0; i < ext_dim; ++i) xe(i) = xint(ext2int[i]);
    return xe;
  }
};

Internal build_internal(const ConeProgram& p) {
  Internal w;
  int ext_off = 0;
  for (const auto& blk : p.cones()) {
    Block ib;
    ib.offset = w.dim;
    if (blk.kind == ConeKind::free_var) {
      ib.kind = ConeKind::soc;
      ib.size = blk.size + 1;
      ib.vlen = ib.size;
      for (int i = 0; i < blk.size; ++i)
        w.ext2int.push_back(w.dim + 1 + i);  // head is internal-only
      w.degree += 1.0;
    } else {
      ib.kind = blk.kind;
      ib.size = blk.size;
      ib.vlen = cone_vec_len(blk);
      for (int i = 0; i < ib.vlen; ++i) w.ext2int.push_back(w.dim + i);
      switch (blk.kind) {
        case ConeKind::nonneg: w.degree += blk.size; break;
        case ConeKind::soc: w.degree += 1.0; break;
        case ConeKind::psd: w.degree += blk.size; break;
        default: break;
      }
    }
    w.dim += ib.vlen;
    w.blocks.push_back(std::move(ib));
    ext_off += cone_vec_len(blk);
  }
  (void)ext_off;

  w.c = Vec::Zero(w.dim);
  for (int i = 0; i < p.var_dim(); ++i) w.c(w.ext2int[i]) = p.objective()(i);

  w.m = p.num_rows();
  w.b = p.rhs();
  w.bnorm_ext = w.b.size() ? w.b.norm() : 0.0;
  w.cnorm_ext = p.objective().norm();
  w.rows.resize(w.m);
  w.row_scale = Vec::Ones(w.m);
  for (int i = 0; i < w.m; ++i) {
    w.rows[i].reserve(p.rows()[i].size());
    double nrm2 = 0.0;
    for (const auto& [idx, val] : p.rows()[i]) nrm2 += val * val;
    const double f = nrm2 > 0.0 ? 1.0 / std::sqrt(nrm2) : 1.0;
    w.row_scale(i) = f;
    w.b(i) *= f;
    for (const auto& [idx, val] : p.rows()[i]) w.rows[i].push_back({w.ext2int[idx], val * f});
  }

  // Scalar normalization of the (row-equilibrated) data.
  w.sigma_b = std::max(1.0, w.b.size() ? w.b.norm() : 0.0);
  w.sigma_c = std::max(1.0, w.c.norm());
  w.b /= w.sigma_b;
  w.c /= w.sigma_c;

  // Per-block row slices.
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < w.m; ++i) {
    for (auto& blk : w.blocks) {
      BlockRowData brd;
      for (const auto& [idx, val] : w.rows[i]) {
        if (idx < blk.offset || idx >= blk.offset + blk.vlen) continue;
        brd.svec.push_back({idx - blk.offset, val});
      }
      if (brd.svec.empty()) continue;
      brd.row = i;
      if (blk.kind == ConeKind::psd) {
        for (const auto& [loc, val] : brd.svec) {
          // invert svec_index: find (r, c) with c*(c+1)/2 + r == loc, r <= c
          int c = static_cast<int>((std::sqrt(8.0 * loc + 1.0) - 1.0) / 2.0);
          while (c * (c + 1) / 2 > loc) --c;
          while ((c + 1) * (c + 2) / 2 <= loc) ++c;
          const int r = loc - c * (c + 1) / 2;
          if (r == c) {
            brd.full.push_back({r, c, val});
          } else {
            brd.full.push_back({r, c, val * inv_rt2});
            brd.full.push_back({c, r, val * inv_rt2});
          }
        }
      }
      blk.rows.push_back(std::move(brd));
    }
  }
  return w;
}

Vec identity_point(const Internal& w) {
  Vec e = Vec::Zero(w.dim);
  for (const auto& blk : w.blocks) {
    switch (blk.kind) {
      case ConeKind::nonneg:
        e.segment(blk.offset, blk.vlen).setOnes();
        break;
      case ConeKind::soc:
        e(blk.offset) = 1.0;
        break;
      case ConeKind::psd:
        for (int i = 0; i < blk.size; ++i) e(blk.offset + svec_index(i, i)) = 1.0;
        break;
      default: break;
    }
  }
  return e;
}

bool compute_scaling(Internal& w, const Vec& x, const Vec& s) {
  for (auto& blk : w.blocks) {
    const auto xs = x.segment(blk.offset, blk.vlen);
    const auto ss = s.segment(blk.offset, blk.vlen);
    switch (blk.kind) {
      case ConeKind::nonneg: {
        blk.d = xs.cwiseQuotient(ss);
        blk.lambda = xs.cwiseProduct(ss).cwiseSqrt();
        if (!(blk.d.allFinite() && (xs.minCoeff() > 0.0) && (ss.minCoeff() > 0.0))) return false;
        break;
      }
      case ConeKind::soc: {
        const int n = blk.size;
        const double nx2 = xs(0) * xs(0) - xs.tail(n - 1).squaredNorm();
        const double ns2 = ss(0) * ss(0) - ss.tail(n - 1).squaredNorm();
        if (nx2 <= 0.0 || ns2 <= 0.0 || xs(0) <= 0.0 || ss(0) <= 0.0) return false;
        const double nx = std::sqrt(nx2), ns = std::sqrt(ns2);
        Vec xh = xs / nx, sh = ss / ns;
        Vec jsh = sh;
        jsh.tail(n - 1) = -sh.tail(n - 1);
        const double gamma2 = 0.5 * (1.0 + xh.dot(sh));
        if (gamma2 <= 0.0) return false;
        const double gamma = std::sqrt(gamma2);
        Vec wbar = (xh + jsh) / (2.0 * gamma);  // scaling point, wbar'J wbar = 1
        // Jordan square root of the scaling point gives the reflector vector.
        Vec v = wbar;
        v(0) += 1.0;
        v /= std::sqrt(2.0 * (wbar(0) + 1.0));
        const double beta = std::sqrt(nx / ns);
        Mat J = -Mat::Identity(n, n);
        J(0, 0) = 1.0;
        blk.W = beta * (2.0 * v * v.transpose() - J);
        // hyperbolic Householder inverse: (2 v v' - J)^{-1} = 2 (Jv)(Jv)' - J
        Vec jw = v;
        jw.tail(n - 1) = -v.tail(n - 1);
        blk.Winv = (2.0 * jw * jw.transpose() - J) / beta;
        blk.H = blk.W * blk.W;
        blk.lambda = blk.W * ss;
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        Mat X = mat_of_svec(n, x.data() + blk.offset);
        Mat S = mat_of_svec(n, s.data() + blk.offset);
        Eigen::LLT<Mat> lx(X), ls(S);
        if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
        Mat Lx = lx.matrixL();
        Mat inner = Lx.transpose() * S * Lx;
        Eigen::SelfAdjointEigenSolver<Mat> es(inner);
        if (es.info() != Eigen::Success) return false;
        Vec sig2 = es.eigenvalues();
        if (sig2.minCoeff() <= 0.0) return false;
        Vec sig = sig2.cwiseSqrt();
        Mat V = es.eigenvectors();
        blk.sigma = sig;
        blk.R = Lx * V * sig.cwiseSqrt().cwiseInverse().asDiagonal();
        // R^{-1} = diag(sig)^{1/2} V' Lx^{-1}
        Mat LxinvT = Lx.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
        blk.Rinv = sig.cwiseSqrt().asDiagonal() * V.transpose() * LxinvT;
        blk.T = blk.R * blk.R.transpose();
        blk.lambda = Vec::Zero(blk.vlen);
        for (int i = 0; i < n; ++i) blk.lambda(svec_index(i, i)) = sig(i);
        break;
      }
      default:
        return false;
    }
  }
  return true;
}

enum class WOp { W, Winv, WinvT, H };

Vec apply_scaling(const Internal& w, WOp op, const Vec& u) {
  Vec out(w.dim);
  for (const auto& blk : w.blocks) {
    const auto us = u.segment(blk.offset, blk.vlen);
    auto os = out.segment(blk.offset, blk.vlen);
    switch (blk.kind) {
      case ConeKind::nonneg: {
        Vec sd = blk.d.cwiseSqrt();
        switch (op) {
          case WOp::W: os = sd.cwiseProduct(us); break;
          case WOp::Winv:
          case WOp::WinvT: os = us.cwiseQuotient(sd); break;
          case WOp::H: os = blk.d.cwiseProduct(us); break;
        }
        break;
      }
      case ConeKind::soc: {
        switch (op) {
          case WOp::W: os = blk.W * us; break;
          case WOp::Winv:
          case WOp::WinvT: os = blk.Winv * us; break;
          case WOp::H: os = blk.H * us; break;
        }
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        Mat U = mat_of_svec(n, u.data() + blk.offset);
        Mat res;
        switch (op) {
          case WOp::W: res = blk.R.transpose() * U * blk.R; break;
          case WOp::Winv: res = blk.Rinv.transpose() * U * blk.Rinv; break;
          case WOp::WinvT: res = blk.Rinv * U * blk.Rinv.transpose(); break;
          case WOp::H: res = blk.T * U * blk.T; break;
        }
        res = 0.5 * (res + res.transpose());
        Vec tmp(blk.vlen);
        svec_of_mat(res, tmp.data());
        os = tmp;
        break;
      }
      default: break;
    }
  }
  return out;
}

// Jordan product u o v evaluated blockwise.
Vec jordan_mul(const Internal& w, const Vec& u, const Vec& v) {
  Vec out(w.dim);
  for (const auto& blk : w.blocks) {
    const auto us = u.segment(blk.offset, blk.vlen);
    const auto vs = v.segment(blk.offset, blk.vlen);
    auto os = out.segment(blk.offset, blk.vlen);
    switch (blk.kind) {
      case ConeKind::nonneg:
        os = us.cwiseProduct(vs);
        break;
      case ConeKind::soc: {
        const int n = blk.size;
        os(0) = us.dot(vs);
        os.tail(n - 1) = us(0) * vs.tail(n - 1) + vs(0) * us.tail(n - 1);
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        Mat U = mat_of_svec(n, u.data() + blk.offset);
        Mat V = mat_of_svec(n, v.data() + blk.offset);
        Mat res = 0.5 * (U * V + V * U);
        res = 0.5 * (res + res.transpose());
        Vec tmp(blk.vlen);
        svec_of_mat(res, tmp.data());
        os = tmp;
        break;
      }
      default: break;
    }
  }
  return out;
}

// Solve lambda o z = d for z, with lambda the current scaled point.
Vec lambda_solve(const Internal& w, const Vec& d) {
  Vec out(w.dim);
  for (const auto& blk : w.blocks) {
    const auto ds = d.segment(blk.offset, blk.vlen);
    const auto ls = blk.lambda.segment(0, blk.vlen);
    auto os = out.segment(blk.offset, blk.vlen);
    switch (blk.kind) {
      case ConeKind::nonneg:
        os = ds.cwiseQuotient(ls);
        break;
      case ConeKind::soc: {
        const int n = blk.size;
        const double l0 = ls(0);
        const double det = l0 * l0 - ls.tail(n - 1).squaredNorm();
        const double z0 = (l0 * ds(0) - ls.tail(n - 1).dot(ds.tail(n - 1))) / det;
        os(0) = z0;
        os.tail(n - 1) = (ds.tail(n - 1) - z0 * ls.tail(n - 1)) / l0;
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        Mat D = mat_of_svec(n, d.data() + blk.offset);
        Mat Z(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) Z(r, c) = 2.0 * D(r, c) / (blk.sigma(r) + blk.sigma(c));
        Vec tmp(blk.vlen);
        svec_of_mat(Z, tmp.data());
        os = tmp;
        break;
      }
      default: break;
    }
  }
  return out;
}

// Largest step alpha such that lambda + alpha * dir stays in the cone.
double step_to_boundary(const Internal& w, const Vec& dir) {
  double alpha = kInf;
  for (const auto& blk : w.blocks) {
    const auto ls = blk.lambda;
    const auto ds = dir.segment(blk.offset, blk.vlen);
    switch (blk.kind) {
      case ConeKind::nonneg: {
        for (int i = 0; i < blk.vlen; ++i)
          if (ds(i) < 0.0) alpha = std::min(alpha, -ls(i) / ds(i));
        break;
      }
      case ConeKind::soc: {
        const int n = blk.size;
        const double a = ds(0) * ds(0) - ds.tail(n - 1).squaredNorm();
        const double b = 2.0 * (ls(0) * ds(0) - ls.tail(n - 1).dot(ds.tail(n - 1)));
        const double c = ls(0) * ls(0) - ls.tail(n - 1).squaredNorm();
        double root = kInf;
        if (std::abs(a) < 1e-300) {
          if (b < 0.0) root = -c / b;
        } else {
          const double disc = b * b - 4.0 * a * c;
          if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double r : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)})
              if (r > 0.0) root = std::min(root, r);
          }
        }
        if (ds(0) < 0.0) root = std::min(root, -ls(0) / ds(0));
        alpha = std::min(alpha, root);
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        Mat D = mat_of_svec(n, dir.data() + blk.offset);
        Vec isq = blk.sigma.cwiseSqrt().cwiseInverse();
        Mat E = isq.asDiagonal() * D * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Mat> es(E, Eigen::EigenvaluesOnly);
        const double emin = es.eigenvalues().minCoeff();
        if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
        break;
      }
      default: break;
    }
  }
  return alpha;
}

// Schur complement M = A H A'.
Mat assemble_schur(const Internal& w) {
  Mat M = Mat::Zero(w.m, w.m);
  for (const auto& blk : w.blocks) {
    if (blk.rows.empty()) continue;
    const int nt = static_cast<int>(blk.rows.size());
    switch (blk.kind) {
      case ConeKind::nonneg: {
        for (int a = 0; a < nt; ++a) {
          for (int b = a; b < nt; ++b) {
            double acc = 0.0;
            // merge the two short sorted coordinate lists
            const auto& ra = blk.rows[a].svec;
            const auto& rb = blk.rows[b].svec;
            size_t ia = 0, ib = 0;
            while (ia < ra.size() && ib < rb.size()) {
              if (ra[ia].first < rb[ib].first) ++ia;
              else if (ra[ia].first > rb[ib].first) ++ib;
              else {
                acc += ra[ia].second * rb[ib].second * blk.d(ra[ia].first);
                ++ia;
                ++ib;
              }
            }
            M(blk.rows[a].row, blk.rows[b].row) += acc;
            if (a != b) M(blk.rows[b].row, blk.rows[a].row) += acc;
          }
        }
        break;
      }
      case ConeKind::soc: {
        std::vector<Vec> hs(nt);
        for (int a = 0; a < nt; ++a) {
          Vec va = Vec::Zero(blk.vlen);
          for (const auto& [loc, val] : blk.rows[a].svec) va(loc) = val;
          hs[a] = blk.H * va;
        }
        for (int a = 0; a < nt; ++a)
          for (int b = a; b < nt; ++b) {
            double acc = 0.0;
            for (const auto& [loc, val] : blk.rows[b].svec) acc += val * hs[a](loc);
            M(blk.rows[a].row, blk.rows[b].row) += acc;
            if (a != b) M(blk.rows[b].row, blk.rows[a].row) += acc;
          }
        break;
      }
      case ConeKind::psd: {
        const int n = blk.size;
        // D_a = T Atilde_a T, formed by outer products for sparse rows and
        // dense congruence otherwise; pair terms read D_a at B's support.
        std::vector<Mat> ds(nt);
        for (int a = 0; a < nt; ++a) {
          const auto& fa = blk.rows[a].full;
          if (static_cast<int>(fa.size()) * 4 < n * n) {
            Mat D = Mat::Zero(n, n);
            for (const auto& e : fa)
              D.noalias() += e.v * (blk.T.col(e.r) * blk.T.row(e.c));
            ds[a] = std::move(D);
          } else {
            Mat Af = Mat::Zero(n, n);
            for (const auto& e : fa) Af(e.r, e.c) += e.v;
            ds[a] = blk.T * Af * blk.T;
          }
        }
        for (int a = 0; a < nt; ++a)
          for (int b = a; b < nt; ++b) {
            double acc = 0.0;
            for (const auto& e : blk.rows[b].full) acc += e.v * ds[a](e.r, e.c);
            M(blk.rows[a].row, blk.rows[b].row) += acc;
            if (a != b) M(blk.rows[b].row, blk.rows[a].row) += acc;
          }
        break;
      }
      default: break;
    }
  }
  return M;
}

Vec apply_rows(const Internal& w, const Vec& x) {
  Vec out = Vec::Zero(w.m);
  for (int i = 0; i < w.m; ++i) {
    double acc = 0.0;
    for (const auto& [idx, val] : w.rows[i]) acc += val * x(idx);
    out(i) = acc;
  }
  return out;
}

Vec apply_rows_t(const Internal& w, const Vec& y) {
  Vec out = Vec::Zero(w.dim);
  for (int i = 0; i < w.m; ++i) {
    const double yi = y(i);
    if (yi == 0.0) continue;
    for (const auto& [idx, val] : w.rows[i]) out(idx) += val * yi;
  }
  return out;
}

double cone_violation(const ConeProgram& p, const Vec& v) {
  double worst = 0.0;
  for (int j = 0; j < p.num_blocks(); ++j) {
    const ConeBlock& blk = p.cones()[j];
    const int off = p.block_offset(j);
    const int len = cone_vec_len(blk);
    const auto seg = v.segment(off, len);
    switch (blk.kind) {
      case ConeKind::nonneg:
        worst = std::max(worst, std::max(0.0, -seg.minCoeff()));
        break;
      case ConeKind::soc:
        worst = std::max(worst, std::max(0.0, seg.tail(len - 1).norm() - seg(0)));
        break;
      case ConeKind::psd: {
        Mat m = mat_of_svec(blk.size, v.data() + off);
        Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
        worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()));
        break;
      }
      case ConeKind::free_var:
        break;
    }
  }
  return worst;
}

}  // namespace

ConeSolution solve(const ConeProgram& p, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve(p, opts);
}

ConeSolution solve(const ConeProgram& p, const SolverOptions& opts) {
  ConeSolution sol;
  const double tol = std::clamp(opts.tol, 1e-10, 1e-4);

  Internal w = build_internal(p);
  const int m = w.m;

  if (w.dim == 0) {
    sol.status = (m == 0 || w.b.norm() == 0.0) ? SolveStatus::optimal : SolveStatus::infeasible;
    sol.x.resize(0);
    sol.y = Vec::Zero(m);
    sol.s.resize(0);
    sol.tau = 1.0;
    return sol;
  }

  Vec x = identity_point(w);
  Vec s = identity_point(w);
  Vec y = Vec::Zero(m);
  double tau = 1.0, kappa = 1.0;

  const double nu = w.degree + 1.0;

  // Best iterate seen so far (by worst-of-three residual score).
  Vec best_x = x, best_y = y, best_s = s;
  double best_tau = tau, best_kappa = kappa;
  double best_score = kInf;
  int tiny_steps = 0;
  int since_best = 0;

  auto finalize = [&](SolveStatus status, int iters) {
    sol.status = status;
    sol.x = w.to_external(best_x * (w.sigma_b / best_tau), p.var_dim());
    sol.s = w.to_external(best_s * (w.sigma_c / best_tau), p.var_dim());
    sol.y = w.row_scale.cwiseProduct(best_y) * (w.sigma_c / best_tau);
    sol.primal_obj = p.objective().dot(sol.x);
    sol.dual_obj = sol.y.size() ? p.rhs().dot(sol.y) : 0.0;
    sol.objective = sol.primal_obj;
    sol.iterations = iters;
    sol.tau = best_tau;
    sol.kappa = best_kappa;
  };

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Vec r_p = apply_rows(w, x) - w.b * tau;
    const Vec r_d = -apply_rows_t(w, y) - s + w.c * tau;
    const double by = w.b.size() ? w.b.dot(y) : 0.0;
    const double cx = w.c.dot(x);
    const double r_g = by - cx - kappa;
    const double mu = (x.dot(s) + tau * kappa) / nu;

    // Optimality check on the de-homogenized candidate, in external units.
    const double pres = (r_p.cwiseQuotient(w.row_scale)).norm() * w.sigma_b / tau /
                        (1.0 + w.bnorm_ext);
    const double dres = r_d.norm() * w.sigma_c / tau / (1.0 + w.cnorm_ext);
    const double pobj = cx * w.sigma_b * w.sigma_c / tau;
    const double dobj = by * w.sigma_b * w.sigma_c / tau;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double score = std::max({pres, dres, gap});
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_y = y;
      best_s = s;
      best_tau = tau;
      best_kappa = kappa;
      since_best = 0;
    } else if (++since_best > 12) {
      sol.note = "no further progress beyond attained accuracy";
      break;
    }
    sol.res_primal = pres;
    sol.res_dual = dres;
    sol.res_gap = gap;
    if (pres <= tol && dres <= tol && gap <= tol) {
      finalize(SolveStatus::optimal, iter);
      sol.res_primal = pres;
      sol.res_dual = dres;
      sol.res_gap = gap;
      return sol;
    }

    // Infeasibility certificates (external units).
    if (by > 0.0) {
      const double r = (apply_rows_t(w, y) + s).norm() * (1.0 + w.bnorm_ext) / (w.sigma_b * by);
      if (r <= tol) {
        sol.status = SolveStatus::infeasible;
        sol.y = w.row_scale.cwiseProduct(y) / (w.sigma_b * by);
        sol.x = w.to_external(x, p.var_dim());
        sol.s = w.to_external(s / (w.sigma_b * by), p.var_dim());
        sol.iterations = iter;
        sol.tau = tau;
        sol.kappa = kappa;
        sol.note = "primal infeasibility certificate: b'y = 1, A'y + s = 0";
        return sol;
      }
    }
    if (-cx > 0.0) {
      const double r = (apply_rows(w, x).cwiseQuotient(w.row_scale)).norm() *
                       (1.0 + w.cnorm_ext) / (w.sigma_c * (-cx));
      if (r <= tol) {
        sol.status = SolveStatus::unbounded;
        sol.x = w.to_external(x / (w.sigma_c * (-cx)), p.var_dim());
        sol.y = w.row_scale.cwiseProduct(y);
        sol.s = w.to_external(s, p.var_dim());
        sol.iterations = iter;
        sol.tau = tau;
        sol.kappa = kappa;
        sol.note = "dual infeasibility certificate: c'x = -1, Ax = 0";
        return sol;
      }
    }

    if (!compute_scaling(w, x, s)) {
      sol.status = SolveStatus::max_iters;
      sol.iterations = iter;
      sol.note = "numerical breakdown: iterate left the cone interior";
      break;
    }

    Mat M = assemble_schur(w);
    Eigen::LLT<Mat> llt;
    if (m > 0) {
      double reg = 1e-13 * std::max(1.0, M.diagonal().maxCoeff());
      for (int attempt = 0; attempt < 4; ++attempt) {
        Mat Mr = M + reg * Mat::Identity(m, m);
        llt.compute(Mr);
        if (llt.info() == Eigen::Success) break;
        reg *= 1e3;
      }
      if (llt.info() != Eigen::Success) {
        sol.note = "numerical breakdown: Schur complement not positive definite";
        break;
      }
    }

    // Schur solve with iterative refinement against the unregularized matrix.
    auto msolve = [&](const Vec& rhs) -> Vec {
      Vec u = llt.solve(rhs);
      for (int pass = 0; pass < 3; ++pass) {
        const Vec resid = rhs - M * u;
        if (resid.norm() <= 1e-14 * (1.0 + rhs.norm())) break;
        u += llt.solve(resid);
      }
      return u;
    };

    const Vec Hc = apply_scaling(w, WOp::H, w.c);
    Vec u1 = Vec::Zero(m);
    if (m > 0) u1 = msolve(apply_rows(w, Hc) + w.b);

    // One direction solve for given eta and complementarity targets.
    auto direction = [&](double eta, const Vec& d_s, double d_kappa, Vec& dx, Vec& dy,
                         Vec& dsl, double& dtau, double& dkap) -> bool {
      const Vec dtil = lambda_solve(w, d_s);
      const Vec g0 = apply_scaling(w, WOp::Winv, dtil) - eta * r_d;
      const Vec Hg0 = apply_scaling(w, WOp::H, g0);
      Vec u2 = Vec::Zero(m);
      if (m > 0) u2 = msolve(-eta * r_p - apply_rows(w, Hg0));
      const Vec HAtu2 = m > 0 ? apply_scaling(w, WOp::H, apply_rows_t(w, u2)) : Vec::Zero(w.dim);
      const Vec HAtu1 = m > 0 ? apply_scaling(w, WOp::H, apply_rows_t(w, u1)) : Vec::Zero(w.dim);

      const double den = (m > 0 ? w.b.dot(u1) - w.c.dot(HAtu1) : 0.0) + w.c.dot(Hc) + kappa / tau;
      const double num = -eta * r_g - (m > 0 ? w.b.dot(u2) : 0.0) +
                         (m > 0 ? w.c.dot(HAtu2) : 0.0) + w.c.dot(Hg0) + d_kappa / tau;
      if (!(std::abs(den) > 1e-300) || !std::isfinite(num)) return false;
      dtau = num / den;
      dy = m > 0 ? Vec(u2 + dtau * u1) : Vec::Zero(0);
      const Vec inner = (m > 0 ? apply_rows_t(w, dy) : Vec::Zero(w.dim)) - w.c * dtau + g0;
      dx = apply_scaling(w, WOp::H, inner);
      dsl = -(m > 0 ? apply_rows_t(w, dy) : Vec::Zero(w.dim)) + w.c * dtau + eta * r_d;
      dkap = (d_kappa - kappa * dtau) / tau;
      return dx.allFinite() && dsl.allFinite() && std::isfinite(dtau);
    };

    // Predictor (affine direction).
    Vec lambda_full(w.dim);
    for (const auto& blk : w.blocks) lambda_full.segment(blk.offset, blk.vlen) = blk.lambda;
    const Vec ll = jordan_mul(w, lambda_full, lambda_full);

    Vec dx_a, dy_a, ds_a;
    double dtau_a, dkap_a;
    if (!direction(1.0, -ll, -tau * kappa, dx_a, dy_a, ds_a, dtau_a, dkap_a)) {
      sol.note = "numerical breakdown in affine direction";
      break;
    }

    const Vec sx_a = apply_scaling(w, WOp::WinvT, dx_a);
    const Vec ss_a = apply_scaling(w, WOp::W, ds_a);
    double alpha_a = std::min({step_to_boundary(w, sx_a), step_to_boundary(w, ss_a)});
    if (dtau_a < 0.0) alpha_a = std::min(alpha_a, -tau / dtau_a);
    if (dkap_a < 0.0) alpha_a = std::min(alpha_a, -kappa / dkap_a);
    alpha_a = std::min(alpha_a, 1.0);

    const double mu_aff = ((x + alpha_a * dx_a).dot(s + alpha_a * ds_a) +
                           (tau + alpha_a * dtau_a) * (kappa + alpha_a * dkap_a)) /
                          nu;
    double sigma = std::clamp(std::pow(std::max(0.0, mu_aff / mu), 3.0), 0.0, 0.99);

    // Corrector (combined direction).
    Vec e = identity_point(w);
    const Vec corr = jordan_mul(w, sx_a, ss_a);
    const Vec d_s = -ll - corr + sigma * mu * e;
    const double d_kappa = -tau * kappa - dtau_a * dkap_a + sigma * mu;

    Vec dx, dy, dsl;
    double dtau, dkap;
    if (!direction(1.0 - sigma, d_s, d_kappa, dx, dy, dsl, dtau, dkap)) {
      sol.note = "numerical breakdown in combined direction";
      break;
    }

    const Vec sx = apply_scaling(w, WOp::WinvT, dx);
    const Vec ss = apply_scaling(w, WOp::W, dsl);
    double alpha = std::min({step_to_boundary(w, sx), step_to_boundary(w, ss)});
    if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.0) alpha = std::min(alpha, -kappa / dkap);
    alpha = std::min(opts.step_fraction * alpha, 1.0);
    tiny_steps = (alpha < 1e-8) ? tiny_steps + 1 : 0;
    if (tiny_steps >= 6 || !(alpha > 1e-14)) {
      sol.note = "stalled: vanishing step size";
      break;
    }

    // Take the step, backtracking if it lands outside the cone interior.
    bool stepped = false;
    for (int bt = 0; bt < 6 && !stepped; ++bt) {
      const Vec xn = x + alpha * dx;
      const Vec sn = s + alpha * dsl;
      const double taun = tau + alpha * dtau;
      const double kapn = kappa + alpha * dkap;
      if (taun > 0.0 && kapn > 0.0 && compute_scaling(w, xn, sn)) {
        x = xn;
        s = sn;
        y += alpha * dy;
        tau = taun;
        kappa = kapn;
        stepped = true;
      } else {
        alpha *= 0.5;
      }
    }
    if (!stepped) {
      sol.note = "stalled: no interior step found";
      break;
    }

    if (std::getenv("COVERTSIM_SOLVER_TRACE")) {
      std::fprintf(stderr,
                   "it %3d  pres %.2e dres %.2e gap %.2e  mu %.3e sigma %.2f "
                   "alpha %.3f tau %.3e kappa %.3e\n",
                   iter, pres, dres, gap, mu, sigma, alpha, tau, kappa);
    }
  }

  if (sol.note.empty() && iter >= opts.max_iterations)
    sol.note = "iteration limit reached";

  // Return the best iterate seen; accept it when it meets the tolerance.
  finalize(best_score <= tol ? SolveStatus::optimal : SolveStatus::max_iters, iter);
  {
    const Vec r_p = apply_rows(w, best_x) - w.b * best_tau;
    const Vec r_d = -apply_rows_t(w, best_y) - best_s + w.c * best_tau;
    sol.res_primal = (r_p.cwiseQuotient(w.row_scale)).norm() * w.sigma_b / best_tau /
                     (1.0 + w.bnorm_ext);
    sol.res_dual = r_d.norm() * w.sigma_c / best_tau / (1.0 + w.cnorm_ext);
    const double pobj = w.c.dot(best_x) * w.sigma_b * w.sigma_c / best_tau;
    const double dobj = w.b.size() ? w.b.dot(best_y) * w.sigma_b * w.sigma_c / best_tau : 0.0;
    sol.res_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  }
  return sol;
}

KktResiduals verify_kkt(const ConeProgram& p, const ConeSolution& sol) {
  KktResiduals r;
  if (p.var_dim() == 0) return r;
  const Vec b = p.rhs();
  const Vec& c = p.objective();
  const Vec ax = p.apply(sol.x);
  const double bnorm = b.size() ? b.norm() : 0.0;
  r.primal = (b.size() ? (ax - b).norm() : 0.0) / (1.0 + bnorm) +
             cone_violation(p, sol.x) / (1.0 + sol.x.norm());
  const Vec dres = p.apply_transpose(sol.y) + sol.s - c;
  r.dual = dres.norm() / (1.0 + c.norm()) +
           cone_violation(p, sol.s) / (1.0 + sol.s.norm());
  const double pobj = c.dot(sol.x);
  const double dobj = b.size() ? b.dot(sol.y) : 0.0;
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return r;
}

}  // namespace covertsim
