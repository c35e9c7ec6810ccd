#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature with an interval worklist, plus
// a helper for semi-infinite integrands with exponential tails.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace supercrit {

namespace gk {
// G7K15 nodes (positive half), Kronrod weights, Gauss weights (0 where the
// node is Kronrod-only).
inline constexpr double node[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
inline constexpr double wk[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double wg[8] = {
    0.417959183673469, 0.0, 0.381830050505119, 0.0,
    0.279705391489277, 0.0, 0.129484966168870, 0.0};
}  // namespace gk

template <class F>
double gk15(F&& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double y0 = f(mid);
  double k15 = gk::wk[0] * y0;
  double g7 = gk::wg[0] * y0;
  for (int i = 1; i < 8; ++i) {
    double dx = half * gk::node[i];
    double y = f(mid + dx) + f(mid - dx);
    k15 += gk::wk[i] * y;
    g7 += gk::wg[i] * y;
  }
  k15 *= half;
  g7 *= half;
  double d = std::fabs(k15 - g7);
  double sharp = 200.0 * d * std::sqrt(200.0 * d);  // QUADPACK-style rescale
  err = (std::isfinite(sharp) && sharp < d) ? sharp : d;
  return k15;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                              double abs_tol = 1e-300, int max_intervals = 20000) {
  struct Piece { double a, b, val, err; };
  std::vector<Piece> work;
  double e0;
  double v0 = gk15(f, a, b, e0);
  work.push_back({a, b, v0, e0});

  double total = v0, total_err = e0;
  int splits = 0;
  while (splits < max_intervals) {
    // find the worst interval
    std::size_t worst = 0;
    for (std::size_t i = 1; i < work.size(); ++i)
      if (work[i].err > work[worst].err) worst = i;
    if (total_err <= rel_tol * std::fabs(total) + abs_tol) break;
    Piece p = work[worst];
    if (p.b - p.a <= 1e-15 * (std::fabs(p.a) + std::fabs(p.b))) break;
    double m = 0.5 * (p.a + p.b);
    double e1, e2;
    double v1 = gk15(f, p.a, m, e1);
    double v2 = gk15(f, m, p.b, e2);
    total += v1 + v2 - p.val;
    total_err += e1 + e2 - p.err;
    work[worst] = {p.a, m, v1, e1};
    work.push_back({m, p.b, v2, e2});
    ++splits;
  }
  return {total, total_err, static_cast<int>(work.size()),
          total_err <= rel_tol * std::fabs(total) + abs_tol};
}

// Integral over [0, inf) of an integrand that decays at least like e^{-y}
// beyond its head; the tail is truncated at y = cutoff log-units.
template <class F>
QuadResult integrate_exponential_tail(F&& f, double cutoff = 60.0,
                                      double rel_tol = 1e-12) {
  QuadResult head = integrate_adaptive(f, 0.0, 1.0, rel_tol);
  QuadResult torso = integrate_adaptive(f, 1.0, 8.0, rel_tol);
  QuadResult tail = integrate_adaptive(f, 8.0, cutoff, rel_tol);
  return {head.value + torso.value + tail.value,
          head.error + torso.error + tail.error,
          head.intervals + torso.intervals + tail.intervals,
          head.converged && torso.converged && tail.converged};
}

}  // namespace supercrit
