#include "covertsim/solver_check.hpp"

#include <Eigen/Dense>
#include <Eigen/Householder>

#include <chrono>
#include <cmath>
#include <sstream>

namespace covertsim {
namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Mat random_orthogonal(RandomStream& rng, int n) {
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gauss();
  Eigen::HouseholderQR<Mat> qr(g);
  return qr.householderQ();
}

void svec_scaled(const Mat& m, Vec& out, int offset) {
  const int n = static_cast<int>(m.rows());
  const double rt2 = std::sqrt(2.0);
  int k = 0;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r, ++k)
      out(offset + k) = (r == c) ? m(r, c) : rt2 * m(r, c);
}

}  // namespace

PlantedProgram gen_planted_program(RandomStream& rng, const PlantedSpec& spec) {
  std::vector<ConeBlock> blocks;
  const int n_blocks = 1 + static_cast<int>(rng.uniform01() * 3.0);
  bool has_psd = false;
  for (int i = 0; i < n_blocks; ++i) {
    const double pick = rng.uniform01();
    if (pick < 0.45 || (!has_psd && i + 1 == n_blocks)) {
      const int d = 2 + static_cast<int>(rng.uniform01() * (spec.max_psd_dim - 1));
      blocks.push_back({ConeKind::psd, d});
      has_psd = true;
    } else if (pick < 0.7) {
      const int d = 2 + static_cast<int>(rng.uniform01() * (spec.max_soc_dim - 1));
      blocks.push_back({ConeKind::soc, d});
    } else if (pick < 0.9 || !spec.allow_free) {
      const int d = 1 + static_cast<int>(rng.uniform01() * (spec.max_nonneg - 1));
      blocks.push_back({ConeKind::nonneg, d});
    } else {
      const int d = 1 + static_cast<int>(rng.uniform01() * 3.0);
      blocks.push_back({ConeKind::free_var, d});
    }
  }

  ConeProgram prog(blocks);
  const int n = prog.var_dim();

  // Strictly complementary pair per block.
  Vec xs = Vec::Zero(n), ss = Vec::Zero(n);
  for (int j = 0; j < static_cast<int>(blocks.size()); ++j) {
    const ConeBlock& blk = blocks[j];
    const int off = prog.block_offset(j);
    switch (blk.kind) {
      case ConeKind::nonneg: {
        for (int i = 0; i < blk.size; ++i) {
          const double v = 0.3 + rng.uniform01();
          if (rng.uniform01() < 0.5) xs(off + i) = v;
          else ss(off + i) = v;
        }
        break;
      }
      case ConeKind::soc: {
        const int d = blk.size;
        const double pick = rng.uniform01();
        if (pick < 0.4) {  // x interior, s = 0
          for (int i = 1; i < d; ++i) xs(off + i) = rng.gauss();
          xs(off) = xs.segment(off + 1, d - 1).norm() + 0.5 + rng.uniform01();
        } else if (pick < 0.8) {  // s interior, x = 0
          for (int i = 1; i < d; ++i) ss(off + i) = rng.gauss();
          ss(off) = ss.segment(off + 1, d - 1).norm() + 0.5 + rng.uniform01();
        } else {  // complementary boundary pair: x = (|v|, v), s = beta (|v|, -v)
          Vec v(d - 1);
          for (int i = 0; i < d - 1; ++i) v(i) = rng.gauss();
          if (v.norm() < 0.2) v(0) += 0.5;
          const double nv = v.norm();
          xs(off) = nv;
          xs.segment(off + 1, d - 1) = v;
          const double beta = 0.3 + rng.uniform01();
          ss(off) = beta * nv;
          ss.segment(off + 1, d - 1) = -beta * v;
        }
        break;
      }
      case ConeKind::psd: {
        const int d = blk.size;
        const Mat u = random_orthogonal(rng, d);
        const int rank = 1 + static_cast<int>(rng.uniform01() * (d - 1));
        Vec lx = Vec::Zero(d), ls = Vec::Zero(d);
        for (int i = 0; i < rank; ++i) lx(i) = 0.3 + rng.uniform01();
        for (int i = rank; i < d; ++i) ls(i) = 0.3 + rng.uniform01();
        Mat X = u * lx.asDiagonal() * u.transpose();
        Mat S = u * ls.asDiagonal() * u.transpose();
        Vec tmpx(prog.var_dim()), tmps(prog.var_dim());
        tmpx.setZero();
        tmps.setZero();
        svec_scaled(0.5 * (X + X.transpose()), xs, off);
        svec_scaled(0.5 * (S + S.transpose()), ss, off);
        break;
      }
      case ConeKind::free_var: {
        for (int i = 0; i < blk.size; ++i) xs(off + i) = rng.gauss();
        // dual slack of free variables is zero
        break;
      }
    }
  }

  const int m = std::max(1, std::min(spec.max_rows, 1 + static_cast<int>(rng.uniform01() * spec.max_rows)));
  Vec ys(m);
  for (int i = 0; i < m; ++i) ys(i) = rng.gauss();

  Mat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.gauss() * (rng.uniform01() < 0.6 ? 1.0 : 0.0);
  // keep rows nonempty and of unit norm
  for (int i = 0; i < m; ++i) {
    if (a.row(i).cwiseAbs().maxCoeff() == 0.0) a(i, static_cast<int>(rng.uniform01() * n)) = 1.0;
    a.row(i) /= a.row(i).norm();
  }

  const Vec b = a * xs;
  const Vec c = ss + a.transpose() * ys;

  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < n; ++j)
      if (a(i, j) != 0.0) row.push_back({j, a(i, j)});
    prog.add_row(std::move(row), b(i));
  }
  prog.set_objective(c);

  PlantedProgram out{std::move(prog), xs, ys, ss, c.dot(xs)};
  return out;
}

SelfCheckResult run_solver_selfcheck(int programs, std::uint64_t seed, const PlantedSpec& spec) {
  SelfCheckResult res;
  res.programs = programs;
  RandomStream root(seed);
  for (int k = 0; k < programs; ++k) {
    RandomStream rng = root.substream(k);
    PlantedProgram pp = gen_planted_program(rng, spec);
    const auto t0 = std::chrono::steady_clock::now();
    ConeSolution sol = solve(pp.program, 1e-7);
    if (sol.status != SolveStatus::optimal) {
      // a second trajectory with a shorter step often clears marginal cases
      SolverOptions retry;
      retry.tol = 1e-7;
      retry.step_fraction = 0.9;
      ConeSolution alt = solve(pp.program, retry);
      const KktResiduals ra = verify_kkt(pp.program, alt);
      const KktResiduals rs = verify_kkt(pp.program, sol);
      if (std::max({ra.primal, ra.dual, ra.gap}) < std::max({rs.primal, rs.dual, rs.gap}))
        sol = alt;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    res.worst_ms = std::max(res.worst_ms, ms);
    res.total_ms += ms;

    // Grade the returned point itself; status stays an honest report.
    bool ok = sol.status == SolveStatus::optimal || sol.status == SolveStatus::max_iters;
    double obj_err = 0.0, kkt = 0.0;
    if (ok) {
      obj_err = std::abs(sol.objective - pp.opt_value) / std::max(1.0, std::abs(pp.opt_value));
      const KktResiduals r = verify_kkt(pp.program, sol);
      kkt = std::max({r.primal, r.dual, r.gap});
      res.max_obj_rel_err = std::max(res.max_obj_rel_err, obj_err);
      res.max_kkt_residual = std::max(res.max_kkt_residual, kkt);
      ok = obj_err <= 1e-6 && kkt <= 1e-7;
    }
    if (ok) {
      ++res.passed;
    } else {
      std::ostringstream msg;
      msg << "program " << k << ": status=" << to_string(sol.status)
          << " obj_err=" << obj_err << " kkt=" << kkt << " iters=" << sol.iterations
          << " res=[" << sol.res_primal << ", " << sol.res_dual << ", " << sol.res_gap << "]";
      if (!sol.note.empty()) msg << " (" << sol.note << ")";
      res.failures.push_back(msg.str());
    }
  }
  return res;
}

}  // namespace covertsim
