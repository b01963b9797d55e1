#pragma once

// Test-only oracles, independent of the library implementation paths they
// check.

#include <cmath>
#include <functional>

namespace covertsim::oracle {

// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Total variation distance between the |y_w|^2 densities under the two
// hypotheses (exponential with means l0 and l1), by numerical integration.
inline double total_variation_numeric(double l0, double l1) {
  const auto p0 = [l0](double r) { return std::exp(-r / l0) / l0; };
  const auto p1 = [l1](double r) { return std::exp(-r / l1) / l1; };
  const auto diff = [&](double r) { return std::abs(p0(r) - p1(r)); };

  const double lmax = std::max(l0, l1);
  if (std::abs(l0 - l1) < 1e-15 * lmax) return 0.0;

  // the densities cross exactly once; bracket the crossing first
  double lo = 1e-9 * lmax, hi = 60.0 * lmax;
  auto g = [&](double r) { return p0(r) - p1(r); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(lo) * g(mid) <= 0.0) hi = mid;
    else lo = mid;
  }
  const double cross = 0.5 * (lo + hi);

  // piecewise panels resolve both the lmin and lmax scales
  const double lmin = std::min(l0, l1);
  double acc = 0.0;
  const double a = std::min(cross, 6.0 * lmin);
  acc += simpson(diff, 0.0, a, 6000);
  if (cross > a) acc += simpson(diff, a, cross, 6000);
  acc += simpson(diff, cross, cross + 20.0 * lmax, 6000);
  acc += simpson(diff, cross + 20.0 * lmax, cross + 120.0 * lmax, 6000);
  return 0.5 * acc;
}

// Bisection root finder on a bracketing interval.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  for (int it = 0; it < iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(lo) * f(mid) <= 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace covertsim::oracle
