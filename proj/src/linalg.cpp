#include "covertsim/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace covertsim {

RMat embed_complex_to_real(const CMat& h) {
  const int n = static_cast<int>(h.rows());
  RMat e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  e.bottomRightCorner(n, n) = h.real();
  return e;
}

CMat unembed_real_to_complex(const RMat& e) {
  const int n = static_cast<int>(e.rows()) / 2;
  CMat h(n, n);
  h.real() = 0.5 * (e.topLeftCorner(n, n) + e.bottomRightCorner(n, n));
  h.imag() = 0.5 * (e.bottomLeftCorner(n, n) - e.topRightCorner(n, n));
  return h;
}

SymEigResult jacobi_eig_sym(const RMat& a, int max_sweeps) {
  const int n = static_cast<int>(a.rows());
  RMat b = 0.5 * (a + a.transpose());
  RMat v = RMat::Identity(n, n);

  const double scale = std::max(1e-300, b.cwiseAbs().maxCoeff());
  const double stop = 1e-14 * scale;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(b(p, q)));
    if (off <= stop) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = b(p, q);
        if (std::abs(apq) <= stop * 1e-2) continue;
        const double theta = (b(q, q) - b(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double bkp = b(k, p), bkq = b(k, q);
          b(k, p) = c * bkp - s * bkq;
          b(k, q) = s * bkp + c * bkq;
        }
        for (int k = 0; k < n; ++k) {
          const double bpk = b(p, k), bqk = b(q, k);
          b(p, k) = c * bpk - s * bqk;
          b(q, k) = s * bpk + c * bqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return b(i, i) > b(j, j); });

  SymEigResult r;
  r.values.resize(n);
  r.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    r.values(i) = b(order[i], order[i]);
    r.vectors.col(i) = v.col(order[i]);
  }
  return r;
}

void fix_phase(CVec& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const Cplx phase = v(imax) / best;
  v /= phase;
}

HermEigResult eig_hermitian(const CMat& h) {
  const int n = static_cast<int>(h.rows());
  const SymEigResult se = jacobi_eig_sym(embed_complex_to_real(h));

  HermEigResult r;
  r.values.resize(n);
  r.vectors.resize(n, n);
  // Eigenvalues of the embedding come in duplicated pairs; take every other
  // one after the descending sort and map [p; q] -> p + i q.
  for (int i = 0; i < n; ++i) {
    r.values(i) = se.values(2 * i);
    CVec u(n);
    for (int k = 0; k < n; ++k)
      u(k) = Cplx(se.vectors(k, 2 * i), se.vectors(n + k, 2 * i));
    const double nrm = u.norm();
    if (nrm > 0.0) u /= nrm;
    fix_phase(u);
    r.vectors.col(i) = u;
  }
  return r;
}

double min_eigenvalue(const CMat& h, double herm_tol) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double dev = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (dev > herm_tol * scale)
    throw std::invalid_argument("min_eigenvalue: input is not Hermitian");
  const HermEigResult e = eig_hermitian(0.5 * (h + h.adjoint()));
  return e.values(e.values.size() - 1);
}

Rank1Factor dominant_rank1_factor(const CMat& w) {
  const int n = static_cast<int>(w.rows());
  Rank1Factor out;
  out.w = CVec::Zero(n);
  out.ratio = 0.0;
  if (w.cwiseAbs().maxCoeff() == 0.0) return out;

  const HermEigResult e = eig_hermitian(0.5 * (w + w.adjoint()));
  const double l1 = e.values(0);
  if (l1 <= 0.0) return out;
  out.w = std::sqrt(l1) * e.vectors.col(0);
  fix_phase(out.w);
  if (n > 1) out.ratio = std::max(0.0, e.values(1)) / l1;
  return out;
}

}  // namespace covertsim
