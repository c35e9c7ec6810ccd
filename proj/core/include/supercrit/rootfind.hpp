#pragma once

// Bracketed scalar root finding: bisection interleaved with a derivative-free
// secant stage, falling back to the midpoint whenever the secant step leaves
// the bracket or stalls.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace supercrit {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class F>
RootResult find_root_bracketed(F&& f, double lo, double hi,
                               double xtol = 1e-15, double ftol = 0.0,
                               int max_iter = 300) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0, 0, true};
  if (fhi == 0.0) return {hi, 0.0, 0, true};
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("find_root_bracketed: no sign change on bracket");

  double x = lo, fx = flo;
  double x_prev = hi, f_prev = fhi;
  for (int it = 0; it < max_iter; ++it) {
    // secant candidate from the two most recent points
    double cand = x - fx * (x - x_prev) / (fx - f_prev);
    double mid = 0.5 * (lo + hi);
    if (!(cand > lo && cand < hi)) cand = mid;
    // keep alternating towards bisection to guarantee progress
    if (it % 2 == 1) cand = mid;

    double fc = f(cand);
    x_prev = x;
    f_prev = fx;
    x = cand;
    fx = fc;
    if (fc == 0.0) return {cand, 0.0, it + 1, true};
    if ((fc > 0.0) == (flo > 0.0)) {
      lo = cand;
      flo = fc;
    } else {
      hi = cand;
      fhi = fc;
    }
    double width = hi - lo;
    if (width <= xtol * (1.0 + std::fabs(lo) + std::fabs(hi)) ||
        (ftol > 0.0 && std::fabs(fc) <= ftol)) {
      double xr = std::fabs(flo) < std::fabs(fhi) ? lo : hi;
      double fr = std::fabs(flo) < std::fabs(fhi) ? flo : fhi;
      if (std::fabs(fx) < std::fabs(fr)) { xr = x; fr = fx; }
      return {xr, fr, it + 1, true};
    }
  }
  return {0.5 * (lo + hi), fx, max_iter, false};
}

// Locates the minimum of a unimodal function on [lo, hi] by golden-section.
template <class F>
double golden_section_min(F&& f, double lo, double hi, double xtol = 1e-10) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol * (1.0 + std::fabs(a) + std::fabs(b))) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace supercrit
