#include "covertsim/design_perfect.hpp"

#include "covertsim/lmi_model.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace covertsim {

BeamformerResult solve_bs_beamformer(const CVec& h_ab, const CVec& h_aw, double p_a) {
  if (h_ab.norm() == 0.0) throw std::invalid_argument("h_ab must be nonzero");
  BeamformerResult out;
  const int m = static_cast<int>(h_ab.size());

  CVec proj = h_ab;
  const double naw2 = h_aw.squaredNorm();
  if (naw2 > 0.0) proj -= h_aw * (h_aw.dot(h_ab) / naw2);

  const double np = proj.norm();
  if (np <= 1e-12 * h_ab.norm()) {
    out.w = CVec::Zero(m);
    out.zero_rate = true;
    return out;
  }
  out.w = std::sqrt(p_a) * proj / np;
  out.objective = std::abs(h_ab.dot(out.w));
  return out;
}

BeamformerResult solve_bs_beamformer_socp(const CVec& h_ab, const CVec& h_aw, double p_a,
                                          double tol) {
  const int m = static_cast<int>(h_ab.size());
  // x = (x0, u) in soc(2m + 1), u the stacked real/imag parts of w
  ConeProgram prog({{ConeKind::soc, 2 * m + 1}});
  prog.add_row({{0, 1.0}}, std::sqrt(p_a));

  auto row_of = [m](const CVec& h, bool imag_part) {
    // real part of h^H w = Re(h)'Re(w) + Im(h)'Im(w)
    // imag part of h^H w = Re(h)'Im(w) - Im(h)'Re(w)
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < m; ++i) {
      const double re = h(i).real(), im = h(i).imag();
      if (!imag_part) {
        if (re != 0.0) row.push_back({1 + i, re});
        if (im != 0.0) row.push_back({1 + m + i, im});
      } else {
        if (re != 0.0) row.push_back({1 + m + i, re});
        if (im != 0.0) row.push_back({1 + i, -im});
      }
    }
    return row;
  };

  prog.add_row(row_of(h_ab, true), 0.0);   // Im{h_ab^H w} = 0
  prog.add_row(row_of(h_aw, false), 0.0);  // h_aw^H w = 0
  prog.add_row(row_of(h_aw, true), 0.0);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(prog.var_dim());
  const auto obj_row = row_of(h_ab, false);
  for (const auto& [idx, val] : obj_row) c(idx) = -val;  // maximize Re{h_ab^H w}
  prog.set_objective(c);

  const ConeSolution sol = solve(prog, tol);
  BeamformerResult out;
  out.w = CVec::Zero(m);
  if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iters) {
    out.zero_rate = true;
    return out;
  }
  for (int i = 0; i < m; ++i) out.w(i) = Cplx(sol.x(1 + i), sol.x(1 + m + i));
  out.objective = std::abs(h_ab.dot(out.w));
  out.zero_rate = out.objective <= 1e-9 * std::sqrt(p_a) * h_ab.norm();
  return out;
}

bool radar_mse_feasible(const RadarDesignInput& in, double* attained_trace) {
  const int nt = static_cast<int>(in.a_r.size());
  const double s_max = in.info.gamma_coeff * in.p_r * nt;  // ||a_r||^2 = N_T
  const Mat6 prior_inv = in.c_prior.inverse();
  const Mat6 post = (prior_inv + s_max * in.info.j).inverse();
  if (attained_trace) *attained_trace = post.trace();
  return post.trace() <= in.mse_max;
}

namespace {

// Quadratic-form coefficients of b^H S b in the Hermitian parameterization
// of S: diagonal s_kk, then (Re s_kl, Im s_kl) for k < l.
struct HermParam {
  int dim = 0;
  int count() const { return dim * dim; }
  // index helpers
  int diag(int k) const { return k; }
  int re(int k, int l) const { return dim + 2 * pair_index(k, l); }
  int im(int k, int l) const { return dim + 2 * pair_index(k, l) + 1; }
  int pair_index(int k, int l) const {
    // pairs (k, l), k < l in column-major order
    return l * (l - 1) / 2 + k;
  }
};

std::vector<double> quad_form_coeffs(const HermParam& hp, const CVec& b) {
  std::vector<double> g(hp.count(), 0.0);
  for (int k = 0; k < hp.dim; ++k) g[hp.diag(k)] = std::norm(b(k));
  for (int l = 1; l < hp.dim; ++l)
    for (int k = 0; k < l; ++k) {
      const Cplx u = std::conj(b(k)) * b(l);
      g[hp.re(k, l)] = 2.0 * u.real();
      g[hp.im(k, l)] = -2.0 * u.imag();
    }
  return g;
}

}  // namespace

RadarWaveformResult solve_radar_waveform(const RadarDesignInput& in) {
  RadarWaveformResult out;
  const int nt = static_cast<int>(in.a_r.size());

  double pre_trace = 0.0;
  if (!radar_mse_feasible(in, &pre_trace)) {
    std::ostringstream msg;
    msg << "tracking constraint infeasible: best attainable trace " << pre_trace
        << " exceeds MSE_max " << in.mse_max << " at full beamformed power";
    out.message = msg.str();
    out.feasible = false;
    return out;
  }

  // Basis for the search space.  The optimum can be restricted to
  // span{a_r, h_rb}: projecting any feasible Q onto it preserves the SNR
  // term, the leakage and the trace while staying PSD.
  CMat basis;
  if (in.reduce_subspace) {
    CMat raw(nt, 2);
    raw.col(0) = in.a_r / in.a_r.norm();
    CVec second = in.h_rb - raw.col(0) * raw.col(0).dot(in.h_rb);
    if (second.norm() > 1e-9 * (in.h_rb.norm() + 1e-300)) {
      raw.col(1) = second / second.norm();
      basis = raw;
    } else {
      basis = raw.leftCols(1);
    }
  } else {
    basis = CMat::Identity(nt, nt);
  }
  const int k = static_cast<int>(basis.cols());

  const CVec b_ar = basis.adjoint() * in.a_r;
  const CVec b_rb = basis.adjoint() * in.h_rb;

  HermParam hp;
  hp.dim = k;

  // Work with the unit-norm information shape and leakage direction; both
  // rescalings leave the optimizer unchanged and keep the program data O(1).
  const double j_norm = std::max(in.info.j.norm(), 1e-300);
  const Mat6 j_unit = in.info.j / j_norm;
  const double rb_norm = b_rb.norm();
  const CVec b_rb_unit = rb_norm > 0.0 ? CVec(b_rb / rb_norm) : b_rb;

  LmiModel model;
  std::vector<int> svars(hp.count());
  for (int i = 0; i < hp.count(); ++i) svars[i] = model.add_var(0.0);
  const int v_snr = model.add_var(0.0);  // scaled SNR term, s * ||J||
  std::vector<int> tvars(6);
  for (int i = 0; i < 6; ++i) tvars[i] = model.add_var(0.0);

  // minimize leakage = b_rb^H S b_rb (unit direction; magnitude re-derived)
  const std::vector<double> leak = quad_form_coeffs(hp, b_rb_unit);
  for (int i = 0; i < hp.count(); ++i) model.add_obj(svars[i], -leak[i]);

  // S >= 0
  const int blk_s = model.add_complex_block(k);
  for (int d = 0; d < k; ++d) model.add_complex_entry(blk_s, d, d, svars[hp.diag(d)], 1.0);
  for (int l = 1; l < k; ++l)
    for (int c = 0; c < l; ++c) {
      model.add_complex_entry(blk_s, c, l, svars[hp.re(c, l)], Cplx(1.0, 0.0));
      model.add_complex_entry(blk_s, c, l, svars[hp.im(c, l)], Cplx(0.0, 1.0));
    }

  // six tracking blocks [[C_prior^-1 + s J, e_i], [e_i', t_i]]
  const Mat6 prior_inv = in.c_prior.inverse();
  for (int i = 0; i < 6; ++i) {
    const int blk = model.add_real_block(7);
    model.add_real_matrix(blk, 0, 0, LmiModel::kConstant, prior_inv);
    model.add_real_matrix(blk, 0, 0, v_snr, j_unit);
    model.add_real_entry(blk, i, 6, LmiModel::kConstant, 1.0);
    model.add_real_entry(blk, 6, 6, tvars[i], 1.0);
  }

  // trace(S) <= P_R
  const int blk_pow = model.add_nonneg_block(1);
  model.add_real_entry(blk_pow, 0, 0, LmiModel::kConstant, in.p_r);
  for (int d = 0; d < k; ++d) model.add_real_entry(blk_pow, 0, 0, svars[hp.diag(d)], -1.0);

  // sum t_i <= MSE_max
  const int blk_mse = model.add_nonneg_block(1);
  model.add_real_entry(blk_mse, 0, 0, LmiModel::kConstant, in.mse_max);
  for (int i = 0; i < 6; ++i) model.add_real_entry(blk_mse, 0, 0, tvars[i], -1.0);

  // s <= gamma_coeff * a_r^H Q a_r (monotone relaxation, tight as needed)
  const int blk_snr = model.add_nonneg_block(1);
  const std::vector<double> snr = quad_form_coeffs(hp, b_ar);
  for (int i = 0; i < hp.count(); ++i)
    model.add_real_entry(blk_snr, 0, 0, svars[i], in.info.gamma_coeff * j_norm * snr[i]);
  model.add_real_entry(blk_snr, 0, 0, v_snr, -1.0);

  const ConeProgram prog = model.build();
  const ConeSolution sol = solve(prog, in.solver_tol);
  out.solver_status = sol.status;
  out.iterations = sol.iterations;

  const LmiModel::Status st = LmiModel::interpret(sol.status);
  if (st == LmiModel::Status::infeasible) {
    out.feasible = false;
    out.message = "radar waveform program reported infeasible";
    return out;
  }
  if (st == LmiModel::Status::unbounded) {
    out.feasible = false;
    out.message = "radar waveform program reported unbounded (data error)";
    return out;
  }

  // The leakage minimum is typically a degenerate face in Q.  Tie-break on
  // it toward maximal power at the predicted target: the echo stays strong
  // and the jamming covers the residual beamformer leakage, at no cost in
  // leakage beyond solver tolerance.
  {
    const double leak_opt = -model.objective(sol);  // b_rb-unit objective
    LmiModel tie;
    std::vector<int> svars2(hp.count());
    for (int i = 0; i < hp.count(); ++i) svars2[i] = tie.add_var(0.0);
    const int v_snr2 = tie.add_var(0.0);
    std::vector<int> tvars2(6);
    for (int i = 0; i < 6; ++i) tvars2[i] = tie.add_var(0.0);

    for (int i = 0; i < hp.count(); ++i) tie.add_obj(svars2[i], snr[i]);

    const int blk_s2 = tie.add_complex_block(k);
    for (int d = 0; d < k; ++d) tie.add_complex_entry(blk_s2, d, d, svars2[hp.diag(d)], 1.0);
    for (int l = 1; l < k; ++l)
      for (int c = 0; c < l; ++c) {
        tie.add_complex_entry(blk_s2, c, l, svars2[hp.re(c, l)], Cplx(1.0, 0.0));
        tie.add_complex_entry(blk_s2, c, l, svars2[hp.im(c, l)], Cplx(0.0, 1.0));
      }
    for (int i = 0; i < 6; ++i) {
      const int blk = tie.add_real_block(7);
      tie.add_real_matrix(blk, 0, 0, LmiModel::kConstant, prior_inv);
      tie.add_real_matrix(blk, 0, 0, v_snr2, j_unit);
      tie.add_real_entry(blk, i, 6, LmiModel::kConstant, 1.0);
      tie.add_real_entry(blk, 6, 6, tvars2[i], 1.0);
    }
    const int blk_pow2 = tie.add_nonneg_block(1);
    tie.add_real_entry(blk_pow2, 0, 0, LmiModel::kConstant, in.p_r);
    for (int d = 0; d < k; ++d) tie.add_real_entry(blk_pow2, 0, 0, svars2[hp.diag(d)], -1.0);
    const int blk_mse2 = tie.add_nonneg_block(1);
    tie.add_real_entry(blk_mse2, 0, 0, LmiModel::kConstant, in.mse_max);
    for (int i = 0; i < 6; ++i) tie.add_real_entry(blk_mse2, 0, 0, tvars2[i], -1.0);
    const int blk_snr2 = tie.add_nonneg_block(1);
    for (int i = 0; i < hp.count(); ++i)
      tie.add_real_entry(blk_snr2, 0, 0, svars2[i], in.info.gamma_coeff * j_norm * snr[i]);
    tie.add_real_entry(blk_snr2, 0, 0, v_snr2, -1.0);
    // leakage cap at the attained minimum (unit direction, tolerance slack)
    const int blk_leak = tie.add_nonneg_block(1);
    tie.add_real_entry(blk_leak, 0, 0, LmiModel::kConstant,
                       leak_opt + 1e-6 * (1.0 + std::abs(leak_opt)));
    for (int i = 0; i < hp.count(); ++i)
      if (leak[i] != 0.0) tie.add_real_entry(blk_leak, 0, 0, svars2[i], -leak[i]);

    const ConeProgram tie_prog = tie.build();
    const ConeSolution tie_sol = solve(tie_prog, in.solver_tol);
    if (LmiModel::interpret(tie_sol.status) == LmiModel::Status::optimal) {
      const std::vector<double> th2 = tie.thetas(tie_sol);
      CMat s2 = CMat::Zero(k, k);
      for (int d = 0; d < k; ++d) s2(d, d) = th2[svars2[hp.diag(d)]];
      for (int l = 1; l < k; ++l)
        for (int c = 0; c < l; ++c) {
          s2(c, l) = Cplx(th2[svars2[hp.re(c, l)]], th2[svars2[hp.im(c, l)]]);
          s2(l, c) = std::conj(s2(c, l));
        }
      out.q = basis * s2 * basis.adjoint();
      out.q = 0.5 * (out.q + out.q.adjoint());
      out.feasible = true;
      out.leakage = (in.h_rb.adjoint() * out.q * in.h_rb)(0, 0).real();
      out.snr_term = (in.a_r.adjoint() * out.q * in.a_r)(0, 0).real();
      out.t.resize(6);
      for (int i = 0; i < 6; ++i) out.t[i] = th2[tvars2[i]];
      return out;
    }
  }

  const std::vector<double> th = model.thetas(sol);
  CMat s_small = CMat::Zero(k, k);
  for (int d = 0; d < k; ++d) s_small(d, d) = th[svars[hp.diag(d)]];
  for (int l = 1; l < k; ++l)
    for (int c = 0; c < l; ++c) {
      s_small(c, l) = Cplx(th[svars[hp.re(c, l)]], th[svars[hp.im(c, l)]]);
      s_small(l, c) = std::conj(s_small(c, l));
    }

  out.q = basis * s_small * basis.adjoint();
  out.q = 0.5 * (out.q + out.q.adjoint());
  out.feasible = true;
  out.leakage = (in.h_rb.adjoint() * out.q * in.h_rb)(0, 0).real();
  out.snr_term = (in.a_r.adjoint() * out.q * in.a_r)(0, 0).real();
  out.t.resize(6);
  for (int i = 0; i < 6; ++i) out.t[i] = th[tvars[i]];
  if (sol.status == SolveStatus::max_iters)
    out.message = "solver stopped at attained accuracy: " + sol.note;
  return out;
}

}  // namespace covertsim
