#include "covertsim/design_robust.hpp"

#include "covertsim/channels.hpp"
#include "covertsim/covertness.hpp"
#include "covertsim/lmi_model.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace covertsim {

namespace {

// Hermitian parameterization order: diagonals, then (Re, Im) per upper pair.
struct HermParam {
  int dim = 0;
  int count() const { return dim * dim; }
  int diag(int k) const { return k; }
  int re(int k, int l) const { return dim + 2 * pair_index(k, l); }
  int im(int k, int l) const { return dim + 2 * pair_index(k, l) + 1; }
  int pair_index(int k, int l) const { return l * (l - 1) / 2 + k; }
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

// Declare the X >= 0 block entries for a Hermitian-parameterized variable.
void add_psd_identity(LmiModel& model, int block, const HermParam& hp,
                      const std::vector<int>& vars) {
  for (int d = 0; d < hp.dim; ++d)
    model.add_complex_entry(block, d, d, vars[hp.diag(d)], 1.0);
  for (int l = 1; l < hp.dim; ++l)
    for (int k = 0; k < l; ++k) {
      model.add_complex_entry(block, k, l, vars[hp.re(k, l)], Cplx(1.0, 0.0));
      model.add_complex_entry(block, k, l, vars[hp.im(k, l)], Cplx(0.0, 1.0));
    }
}

// Entries of (E_param h) for the Hermitian basis directions, used for the
// border column kappa Q h_rw of the robust LMI.
void add_matvec_entries(LmiModel& model, int block, int row0, int col, const HermParam& hp,
                        const std::vector<int>& vars, const CVec& h, Cplx scale) {
  for (int k = 0; k < hp.dim; ++k)
    model.add_complex_entry(block, row0 + k, col, vars[hp.diag(k)], scale * h(k));
  for (int l = 1; l < hp.dim; ++l)
    for (int k = 0; k < l; ++k) {
      // Re basis: e_k e_l' + e_l e_k'
      model.add_complex_entry(block, row0 + k, col, vars[hp.re(k, l)], scale * h(l));
      model.add_complex_entry(block, row0 + l, col, vars[hp.re(k, l)], scale * h(k));
      // Im basis: i (e_k e_l' - e_l e_k')
      model.add_complex_entry(block, row0 + k, col, vars[hp.im(k, l)],
                              scale * Cplx(0.0, 1.0) * h(l));
      model.add_complex_entry(block, row0 + l, col, vars[hp.im(k, l)],
                              scale * Cplx(0.0, -1.0) * h(k));
    }
}

// Row-vector border -(h^H W) over the W parameters: entry at column col0+j.
void add_vecmat_entries(LmiModel& model, int block, int row, int col0, const HermParam& hp,
                        const std::vector<int>& vars, const CVec& h, double scale) {
  for (int k = 0; k < hp.dim; ++k)
    model.add_complex_entry(block, row, col0 + k, vars[hp.diag(k)],
                            scale * std::conj(h(k)));
  for (int l = 1; l < hp.dim; ++l)
    for (int k = 0; k < l; ++k) {
      // (h^H E)_j for E = e_k e_l' + e_l e_k'
      model.add_complex_entry(block, row, col0 + l, vars[hp.re(k, l)],
                              scale * std::conj(h(k)));
      model.add_complex_entry(block, row, col0 + k, vars[hp.re(k, l)],
                              scale * std::conj(h(l)));
      // (h^H E)_j for E = i (e_k e_l' - e_l e_k')
      model.add_complex_entry(block, row, col0 + l, vars[hp.im(k, l)],
                              scale * Cplx(0.0, 1.0) * std::conj(h(k)));
      model.add_complex_entry(block, row, col0 + k, vars[hp.im(k, l)],
                              scale * Cplx(0.0, -1.0) * std::conj(h(l)));
    }
}

CMat herm_from_thetas(const HermParam& hp, const std::vector<double>& th,
                      const std::vector<int>& vars) {
  CMat m = CMat::Zero(hp.dim, hp.dim);
  for (int k = 0; k < hp.dim; ++k) m(k, k) = th[vars[hp.diag(k)]];
  for (int l = 1; l < hp.dim; ++l)
    for (int k = 0; k < l; ++k) {
      m(k, l) = Cplx(th[vars[hp.re(k, l)]], th[vars[hp.im(k, l)]]);
      m(l, k) = std::conj(m(k, l));
    }
  return m;
}

// Clip tolerance-level negative eigenvalues and stay inside the trace budget.
CMat psd_cleanup(const CMat& m, double trace_budget) {
  const HermEigResult e = eig_hermitian(0.5 * (m + m.adjoint()));
  CMat out = CMat::Zero(m.rows(), m.cols());
  double tr = 0.0;
  for (int i = 0; i < e.values.size(); ++i) {
    const double lam = std::max(0.0, e.values(i));
    tr += lam;
    out += lam * (e.vectors.col(i) * e.vectors.col(i).adjoint());
  }
  if (tr > trace_budget && tr > 0.0) out *= trace_budget / tr;
  return 0.5 * (out + out.adjoint());
}

}  // namespace

double covert_kappa(double epsilon, CovertDirection dir) {
  auto [x1, x2] = covert_roots(epsilon);
  return dir == CovertDirection::d01 ? x2 - 1.0 : 1.0 / x1 - 1.0;
}

InnerSdpResult solve_inner_sdp(const RobustDesignInput& in, double l, double kappa_cov) {
  InnerSdpResult out;
  const int m = static_cast<int>(in.h_ab.size());
  const int nt = static_cast<int>(in.h_rb.size());

  // Channel-normalized internal units: unit nominal adversary channels and
  // hatted covariances Wh = nu_aw^2 W / sigma_w^2, Qh = nu_rw^2 Q / sigma_w^2,
  // which keep every LMI entry O(1).
  const double nu_aw_sq = in.h_aw_nominal.squaredNorm();
  const double nu_rw_sq = in.h_rw_nominal.squaredNorm();
  const CVec u_aw = in.h_aw_nominal / std::sqrt(nu_aw_sq);
  const CVec u_rw = in.h_rw_nominal / std::sqrt(nu_rw_sq);
  const double w_back = in.sigma_w_sq / nu_aw_sq;  // W = w_back * Wh
  const double q_back = in.sigma_w_sq / nu_rw_sq;  // Q = q_back * Qh

  HermParam hw, hq;
  hw.dim = m;
  hq.dim = nt;

  LmiModel model;
  std::vector<int> wvars(hw.count()), qvars(hq.count());
  for (int i = 0; i < hw.count(); ++i) wvars[i] = model.add_var(0.0);
  for (int i = 0; i < hq.count(); ++i) qvars[i] = model.add_var(0.0);
  const int v_snr = model.add_var(0.0);
  std::vector<int> tvars(6);
  for (int i = 0; i < 6; ++i) tvars[i] = model.add_var(0.0);

  // objective: trace(H_ab W) - l trace(H_rb Q), rescaled by
  // nu_aw^2 / (sigma_w^2 ||h_ab||^2) which does not move the argmax
  const CVec hab_unit = in.h_ab / in.h_ab.norm();
  const double rb_scale = in.h_rb.squaredNorm() > 0.0
                              ? (q_back / w_back) * in.h_rb.squaredNorm() / in.h_ab.squaredNorm()
                              : 0.0;
  const CVec hrb_unit =
      in.h_rb.norm() > 0.0 ? CVec(in.h_rb / in.h_rb.norm()) : CVec(CVec::Zero(nt));
  {
    const std::vector<double> gw = quad_form_coeffs(hw, hab_unit);
    for (int i = 0; i < hw.count(); ++i) model.add_obj(wvars[i], gw[i]);
    const std::vector<double> gq = quad_form_coeffs(hq, hrb_unit);
    for (int i = 0; i < hq.count(); ++i) model.add_obj(qvars[i], -l * rb_scale * gq[i]);
  }

  // W >= 0, Q >= 0
  const int blk_w = model.add_complex_block(m);
  add_psd_identity(model, blk_w, hw, wvars);
  const int blk_q = model.add_complex_block(nt);
  add_psd_identity(model, blk_q, hq, qvars);

  // robust covert constraint, S-procedure + QMI-to-LMI over the ellipsoids
  const bool rw_robust = in.o_rw > 0.0;
  const bool aw_robust = in.o_aw > 0.0;
  int v_mu1 = -1, v_mu2 = -1;
  if (rw_robust) v_mu1 = model.add_var(0.0);
  if (aw_robust) v_mu2 = model.add_var(0.0);

  const double q1 = kappa_cov;  // (x2 - 1) sigma_w^2 in hatted units

  if (rw_robust || aw_robust) {
    const int nr = rw_robust ? nt : 0;
    const int na = aw_robust ? m : 0;
    const int dim = nr + 1 + na;
    const int blk = model.add_complex_block(dim);
    const int mid = nr;  // scalar row/column index

    if (rw_robust) {
      // (1,1): mu1 C_rw + kappa Qh
      model.add_complex_matrix(blk, 0, 0, v_mu1, in.c_rw);
      for (int k = 0; k < nt; ++k)
        model.add_complex_entry(blk, k, k, qvars[hq.diag(k)], kappa_cov);
      for (int lq = 1; lq < nt; ++lq)
        for (int kq = 0; kq < lq; ++kq) {
          model.add_complex_entry(blk, kq, lq, qvars[hq.re(kq, lq)], kappa_cov);
          model.add_complex_entry(blk, kq, lq, qvars[hq.im(kq, lq)],
                                  Cplx(0.0, kappa_cov));
        }
      // border kappa Qh u_rw
      add_matvec_entries(model, blk, 0, mid, hq, qvars, u_rw, kappa_cov);
      // mu1 enters the scalar through -mu1 o_rw^2
      model.add_complex_entry(blk, mid, mid, v_mu1, -in.o_rw * in.o_rw);
    }

    // scalar: kappa u_rw^H Qh u_rw + q1 - u_aw^H Wh u_aw (- mu2)
    {
      const std::vector<double> gq = quad_form_coeffs(hq, u_rw);
      for (int i = 0; i < hq.count(); ++i)
        if (gq[i] != 0.0) model.add_complex_entry(blk, mid, mid, qvars[i], kappa_cov * gq[i]);
      const std::vector<double> gw = quad_form_coeffs(hw, u_aw);
      for (int i = 0; i < hw.count(); ++i)
        if (gw[i] != 0.0) model.add_complex_entry(blk, mid, mid, wvars[i], -gw[i]);
      model.add_complex_entry(blk, mid, mid, LmiModel::kConstant, q1);
      if (aw_robust) model.add_complex_entry(blk, mid, mid, v_mu2, -1.0);
    }

    if (aw_robust) {
      // border -(u_aw^H Wh) and tail (mu2 / o_aw^2) C_aw - Wh
      add_vecmat_entries(model, blk, mid, mid + 1, hw, wvars, u_aw, -1.0);
      model.add_complex_matrix(blk, mid + 1, mid + 1, v_mu2, in.c_aw,
                               1.0 / (in.o_aw * in.o_aw));
      for (int k = 0; k < m; ++k)
        model.add_complex_entry(blk, mid + 1 + k, mid + 1 + k, wvars[hw.diag(k)], -1.0);
      for (int lw = 1; lw < m; ++lw)
        for (int kw = 0; kw < lw; ++kw) {
          model.add_complex_entry(blk, mid + 1 + kw, mid + 1 + lw, wvars[hw.re(kw, lw)], -1.0);
          model.add_complex_entry(blk, mid + 1 + kw, mid + 1 + lw, wvars[hw.im(kw, lw)],
                                  Cplx(0.0, -1.0));
        }
    }
  } else {
    // zero-uncertainty collapse: nominal scalar covert constraint
    const int blk = model.add_nonneg_block(1);
    const std::vector<double> gq = quad_form_coeffs(hq, u_rw);
    for (int i = 0; i < hq.count(); ++i)
      if (gq[i] != 0.0) model.add_real_entry(blk, 0, 0, qvars[i], kappa_cov * gq[i]);
    const std::vector<double> gw = quad_form_coeffs(hw, u_aw);
    for (int i = 0; i < hw.count(); ++i)
      if (gw[i] != 0.0) model.add_real_entry(blk, 0, 0, wvars[i], -gw[i]);
    model.add_real_entry(blk, 0, 0, LmiModel::kConstant, q1);
  }

  // nonnegative multipliers
  if (rw_robust) {
    const int b = model.add_nonneg_block(1);
    model.add_real_entry(b, 0, 0, v_mu1, 1.0);
  }
  if (aw_robust) {
    const int b = model.add_nonneg_block(1);
    model.add_real_entry(b, 0, 0, v_mu2, 1.0);
  }

  // tracking blocks (30a)-(30b) at the predicted geometry
  const double j_norm = std::max(in.info.j.norm(), 1e-300);
  const Mat6 j_unit = in.info.j / j_norm;
  const Mat6 prior_inv = in.c_prior.inverse();
  for (int i = 0; i < 6; ++i) {
    const int blk = model.add_real_block(7);
    model.add_real_matrix(blk, 0, 0, LmiModel::kConstant, prior_inv);
    model.add_real_matrix(blk, 0, 0, v_snr, j_unit);
    model.add_real_entry(blk, i, 6, LmiModel::kConstant, 1.0);
    model.add_real_entry(blk, 6, 6, tvars[i], 1.0);
  }
  {
    const int blk = model.add_nonneg_block(1);
    model.add_real_entry(blk, 0, 0, LmiModel::kConstant, in.mse_max);
    for (int i = 0; i < 6; ++i) model.add_real_entry(blk, 0, 0, tvars[i], -1.0);
  }
  {
    // s_hat <= gamma_coeff ||J|| a_r^H Q a_r in hatted units
    const int blk = model.add_nonneg_block(1);
    const std::vector<double> snr = quad_form_coeffs(hq, in.a_r);
    const double coeff = in.info.gamma_coeff * j_norm * q_back;
    for (int i = 0; i < hq.count(); ++i)
      if (snr[i] != 0.0) model.add_real_entry(blk, 0, 0, qvars[i], coeff * snr[i]);
    model.add_real_entry(blk, 0, 0, v_snr, -1.0);
  }

  // power budgets: trace(W) <= P_A, trace(Q) <= P_R (hatted)
  {
    const int blk = model.add_nonneg_block(1);
    model.add_real_entry(blk, 0, 0, LmiModel::kConstant, in.p_a / w_back);
    for (int k = 0; k < m; ++k) model.add_real_entry(blk, 0, 0, wvars[hw.diag(k)], -1.0);
  }
  {
    const int blk = model.add_nonneg_block(1);
    model.add_real_entry(blk, 0, 0, LmiModel::kConstant, in.p_r / q_back);
    for (int k = 0; k < nt; ++k) model.add_real_entry(blk, 0, 0, qvars[hq.diag(k)], -1.0);
  }

  const ConeProgram prog = model.build();
  const ConeSolution sol = solve(prog, in.solver_tol);
  out.solver_status = sol.status;
  out.iterations = sol.iterations;

  switch (LmiModel::interpret(sol.status)) {
    case LmiModel::Status::infeasible:
      out.message = "inner SDP infeasible";
      return out;
    case LmiModel::Status::unbounded:
      out.message = "inner SDP unbounded (data error)";
      return out;
    default:
      break;
  }

  const std::vector<double> th = model.thetas(sol);
  out.w_cov = psd_cleanup(w_back * herm_from_thetas(hw, th, wvars), in.p_a);
  out.q = psd_cleanup(q_back * herm_from_thetas(hq, th, qvars), in.p_r);
  out.mu1 = rw_robust ? th[v_mu1] : 0.0;
  out.mu2 = aw_robust ? th[v_mu2] : 0.0;
  out.numerator = (in.h_ab.adjoint() * out.w_cov * in.h_ab)(0, 0).real();
  out.denominator = (in.h_rb.adjoint() * out.q * in.h_rb)(0, 0).real() + in.sigma_b_sq;
  out.objective = out.numerator - l * out.denominator;
  out.feasible = true;
  if (sol.status == SolveStatus::max_iters)
    out.message = "solver stopped at attained accuracy: " + sol.note;
  return out;
}

double worst_case_leak(const CVec& w, const CVec& h_nom, const CMat& c, double r) {
  const double nominal = std::abs(h_nom.dot(w));
  if (r <= 0.0) return nominal * nominal;
  Eigen::LLT<CMat> llt(c);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("uncertainty shape must be positive definite");
  // max_{d^H C d <= r^2} |d^H w| = r ||L^{-1} w||
  const CVec lw = llt.matrixL().solve(w);
  const double amp = nominal + r * lw.norm();
  return amp * amp;
}

double worst_case_jamming(const CMat& q, const CVec& h_nom, const CMat& c, double r) {
  const double nominal = (h_nom.adjoint() * q * h_nom)(0, 0).real();
  if (r <= 0.0) return std::max(0.0, nominal);
  Eigen::LLT<CMat> llt(c);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("uncertainty shape must be positive definite");
  const int n = static_cast<int>(h_nom.size());
  // whiten d = L^{-H} e, ||e|| <= r; minimize the convex quadratic in e
  const CMat b = llt.matrixL().adjoint().solve(CMat::Identity(n, n));
  const CMat a = b.adjoint() * q * b;
  const CVec g = b.adjoint() * (q * h_nom);

  // unconstrained stationary point (pseudo): if within the ball, min there
  auto value_at = [&](const CVec& e) {
    return ((h_nom + b * e).adjoint() * q * (h_nom + b * e))(0, 0).real();
  };
  auto e_of_mu = [&](double mu) -> CVec {
    return (a + mu * CMat::Identity(n, n)).llt().solve(-g);
  };
  // ||e(mu)|| decreases in mu; find the smallest mu >= 0 with ||e|| <= r
  const double mu_floor = 1e-14 * std::max(1.0, a.norm());
  CVec e0 = e_of_mu(mu_floor);
  if (e0.norm() <= r) return std::max(0.0, value_at(e0));
  double lo = mu_floor, hi = std::max(1.0, a.norm());
  while (e_of_mu(hi).norm() > r) hi *= 10.0;
  for (int it = 0; it < 120; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (e_of_mu(mid).norm() > r) lo = mid;
    else hi = mid;
  }
  return std::max(0.0, value_at(e_of_mu(hi)));
}

CVec gaussian_randomization(const CMat& w_cov, const RobustDesignInput& in, const CMat& q,
                            double kappa_cov, RandomStream& rng, int count, bool* fallback) {
  const int m = static_cast<int>(w_cov.rows());
  if (fallback) *fallback = false;

  // factor W (PSD up to solver tolerance)
  const HermEigResult eig = eig_hermitian(0.5 * (w_cov + w_cov.adjoint()));
  CMat factor = CMat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double lam = std::max(0.0, eig.values(i));
    factor.col(i) = std::sqrt(lam) * eig.vectors.col(i);
  }

  const double r_aw = in.o_aw * in.h_aw_nominal.norm();
  const double r_rw = in.o_rw * in.h_rw_nominal.norm();
  const double jam_worst =
      in.o_rw > 0.0 ? worst_case_jamming(q, in.h_rw_nominal, in.c_rw, r_rw)
                    : (in.h_rw_nominal.adjoint() * q * in.h_rw_nominal)(0, 0).real();
  const double allow = kappa_cov * (jam_worst + in.sigma_w_sq);

  auto backoff_scale = [&](const CVec& w) -> double {
    const double leak = in.o_aw > 0.0
                            ? worst_case_leak(w, in.h_aw_nominal, in.c_aw, r_aw)
                            : std::norm(in.h_aw_nominal.dot(w));
    if (leak <= 0.0) return 1.0;
    return std::sqrt(std::max(0.0, std::min(1.0, allow / leak)));
  };

  CVec best;
  double best_obj = -1.0;
  auto consider = [&](CVec w) {
    if (w.norm() == 0.0) return;
    w *= std::sqrt(in.p_a) / w.norm();  // push to the power budget first
    w *= backoff_scale(w);              // then back off for covertness
    const double obj = std::norm(in.h_ab.dot(w));
    if (obj > best_obj) {
      best_obj = obj;
      best = w;
    }
  };

  // deterministic matched candidate from the face of W, then random draws
  consider(w_cov * in.h_ab);
  RandomStream cand_rng = rng.substream(0xca11);
  for (int c = 0; c < count; ++c) {
    CVec g(m);
    for (int i = 0; i < m; ++i) g(i) = cand_rng.cgauss();
    consider(factor * g);
  }

  if (best_obj <= 0.0) {
    if (fallback) *fallback = true;
    const Rank1Factor r1 = dominant_rank1_factor(w_cov);
    CVec w = r1.w;
    if (w.norm() > 0.0) {
      w *= std::min(1.0, std::sqrt(in.p_a) / w.norm());
      w *= backoff_scale(w);
    }
    return w;
  }
  return best;
}

CovertCheck check_covert_constraint(const CVec& w, const CMat& q, const RobustDesignInput& in,
                                    int samples, RandomStream& rng) {
  CovertCheck out;
  const double target = 2.0 * in.epsilon * in.epsilon;
  const double baw = in.o_aw * in.o_aw * in.h_aw_nominal.squaredNorm();
  const double brw = in.o_rw * in.o_rw * in.h_rw_nominal.squaredNorm();
  int ok = 0;
  for (int i = 0; i < samples; ++i) {
    CVec daw = in.o_aw > 0.0 ? sample_ellipsoid(in.c_aw, baw, rng)
                             : CVec(CVec::Zero(in.h_aw_nominal.size()));
    CVec drw = in.o_rw > 0.0 ? sample_ellipsoid(in.c_rw, brw, rng)
                             : CVec(CVec::Zero(in.h_rw_nominal.size()));
    if (i % 3 == 0) {  // include shell points
      if (daw.norm() > 0.0)
        daw *= std::sqrt(baw / (daw.adjoint() * in.c_aw * daw)(0, 0).real());
      if (drw.norm() > 0.0)
        drw *= std::sqrt(brw / (drw.adjoint() * in.c_rw * drw)(0, 0).real());
    }
    const CVec haw = in.h_aw_nominal + daw;
    const CVec hrw = in.h_rw_nominal + drw;
    auto [l0, l1] = lambdas(w, q, haw, hrw, in.sigma_w_sq);
    auto [d01, d10] = kl_divergences(l0, l1);
    const double d = in.direction == CovertDirection::d01 ? d01 : d10;
    out.max_divergence = std::max(out.max_divergence, d);
    if (d <= target + 1e-9) ++ok;
  }
  out.satisfied_fraction = static_cast<double>(ok) / samples;
  return out;
}

CovertCheck check_covert_constraint_matrix(const CMat& w_cov, const CMat& q,
                                           const RobustDesignInput& in, int samples,
                                           RandomStream& rng) {
  CovertCheck out;
  const double target = 2.0 * in.epsilon * in.epsilon;
  const double baw = in.o_aw * in.o_aw * in.h_aw_nominal.squaredNorm();
  const double brw = in.o_rw * in.o_rw * in.h_rw_nominal.squaredNorm();
  int ok = 0;
  for (int i = 0; i < samples; ++i) {
    CVec daw = in.o_aw > 0.0 ? sample_ellipsoid(in.c_aw, baw, rng)
                             : CVec(CVec::Zero(in.h_aw_nominal.size()));
    CVec drw = in.o_rw > 0.0 ? sample_ellipsoid(in.c_rw, brw, rng)
                             : CVec(CVec::Zero(in.h_rw_nominal.size()));
    if (i % 3 == 0) {
      if (daw.norm() > 0.0)
        daw *= std::sqrt(baw / (daw.adjoint() * in.c_aw * daw)(0, 0).real());
      if (drw.norm() > 0.0)
        drw *= std::sqrt(brw / (drw.adjoint() * in.c_rw * drw)(0, 0).real());
    }
    const CVec haw = in.h_aw_nominal + daw;
    const CVec hrw = in.h_rw_nominal + drw;
    const double l0 = (hrw.adjoint() * q * hrw)(0, 0).real() + in.sigma_w_sq;
    const double leak = (haw.adjoint() * w_cov * haw)(0, 0).real();
    auto [d01, d10] = kl_divergences(l0, l0 + std::max(0.0, leak));
    const double d = in.direction == CovertDirection::d01 ? d01 : d10;
    out.max_divergence = std::max(out.max_divergence, d);
    if (d <= target + 1e-9) ++ok;
  }
  out.satisfied_fraction = static_cast<double>(ok) / samples;
  return out;
}

bool dinkelbach_ascent_ok(const std::vector<double>& history, double slack,
                          double l_threshold) {
  if (history.size() < 3) return true;
  const size_t last = history.size() - 1;
  for (size_t i = 3; i <= last; ++i) {
    const double drop = history[i - 1] - history[i];
    const bool ascends = drop <= slack * (1.0 + std::abs(history[i - 1]));
    if (i == last) {
      if (!ascends && std::abs(history[i] - history[i - 1]) > l_threshold) return false;
    } else if (!ascends) {
      return false;
    }
  }
  return true;
}

RobustSolution dinkelbach_solve(const RobustDesignInput& in, RandomStream& rng) {
  RobustSolution out;
  auto roots = covert_roots(in.epsilon);
  out.x1 = roots.first;
  out.x2 = roots.second;
  const double kappa = in.direction == CovertDirection::d01 ? out.x2 - 1.0
                                                            : 1.0 / out.x1 - 1.0;

  // tracking feasibility pre-check at the maximal-SNR rank-1 covariance
  {
    const int nt = static_cast<int>(in.a_r.size());
    const double s_max = in.info.gamma_coeff * in.p_r * nt;
    const Mat6 post = (in.c_prior.inverse() + s_max * in.info.j).inverse();
    if (post.trace() > in.mse_max) {
      std::ostringstream msg;
      msg << "tracking constraint infeasible: best attainable trace " << post.trace()
          << " exceeds MSE_max " << in.mse_max;
      out.message = msg.str();
      out.status = RobustStatus::infeasible;
      return out;
    }
  }

  // l[0] = 0, l[1] = SINR of MRT with the isotropic radar covariance
  const int nt = static_cast<int>(in.h_rb.size());
  const CVec w_mrt = std::sqrt(in.p_a) * in.h_ab / in.h_ab.norm();
  const CMat q_iso = (in.p_r / nt) * CMat::Identity(nt, nt);
  const double l1 = std::norm(in.h_ab.dot(w_mrt)) /
                    ((in.h_rb.adjoint() * q_iso * in.h_rb)(0, 0).real() + in.sigma_b_sq);
  out.l_history = {0.0, l1};

  InnerSdpResult last;
  int n = 1;
  while (n < in.max_iterations &&
         std::abs(out.l_history[n] - out.l_history[n - 1]) > in.l_threshold) {
    const double l = out.l_history[n];
    last = solve_inner_sdp(in, l, kappa);
    out.inner_iterations_total += last.iterations;
    if (!last.feasible) {
      if (n == 1) {
        // probe once at half the covertness slack for the report, then abort
        const InnerSdpResult probe = solve_inner_sdp(in, l, 0.5 * kappa);
        std::ostringstream msg;
        msg << "inner SDP infeasible at iteration 0 (" << last.message
            << "); probe at halved covert slack: "
            << (probe.feasible ? "feasible" : "infeasible");
        out.message = msg.str();
        out.status = RobustStatus::infeasible;
      } else {
        out.message = "inner SDP failed mid-iteration: " + last.message;
        out.status = RobustStatus::solver_trouble;
      }
      return out;
    }
    out.l_history.push_back(last.numerator / last.denominator);
    ++n;
  }

  if (!last.feasible) {
    // initialization already within threshold; solve once at l[1]
    last = solve_inner_sdp(in, out.l_history.back(), kappa);
    out.inner_iterations_total += last.iterations;
    if (!last.feasible) {
      out.message = "inner SDP infeasible: " + last.message;
      out.status = RobustStatus::infeasible;
      return out;
    }
    out.l_history.push_back(last.numerator / last.denominator);
  }

  out.w_cov = last.w_cov;
  out.q = last.q;
  out.final_l = out.l_history.back();

  const Rank1Factor r1 = dominant_rank1_factor(out.w_cov);
  out.rank_ratio = r1.ratio;
  if (r1.ratio <= 1e-6) {
    out.w = r1.w;
    // keep within the exact power budget
    if (out.w.norm() > 0.0)
      out.w *= std::min(1.0, std::sqrt(in.p_a) / out.w.norm());
  } else {
    out.used_randomization = true;
    out.w = gaussian_randomization(out.w_cov, in, out.q, kappa, rng, in.randomization_count,
                                   &out.randomization_fallback);
  }
  out.status = RobustStatus::ok;
  return out;
}

}  // namespace covertsim
