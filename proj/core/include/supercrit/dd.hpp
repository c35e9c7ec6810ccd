#pragma once

// Paired-double ("double-double") arithmetic: an unevaluated sum hi + lo of
// two IEEE doubles giving ~106 bits of significand with the ordinary double
// exponent range.  Used by the shooting integrator when a trajectory needs
// more precision than double (deep oscillation regimes), so only the
// operations the integrator and the growth families require are provided.
//
// Algorithms follow the classical error-free transformations (two_sum,
// two_prod via fma) and the usual reduce-and-square exponential.

#include <cmath>
#include <cstdint>
#include <limits>

namespace supercrit {

struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h), lo(0.0) {}
  constexpr dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi; }
};

namespace detail {

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// requires |a| >= |b| or a == 0
inline dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace detail

inline dd operator+(dd a, dd b) {
  dd s = detail::two_sum(a.hi, b.hi);
  dd t = detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }

inline dd operator*(dd a, dd b) {
  dd p = detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * dd(q1);
  double q2 = r.hi / b.hi;
  r = r - b * dd(q2);
  double q3 = r.hi / b.hi;
  dd q = detail::quick_two_sum(q1, q2);
  return q + dd(q3);
}

inline dd& operator+=(dd& a, dd b) { return a = a + b; }
inline dd& operator-=(dd& a, dd b) { return a = a - b; }
inline dd& operator*=(dd& a, dd b) { return a = a * b; }
inline dd& operator/=(dd& a, dd b) { return a = a / b; }

inline dd operator+(dd a, double b) { return a + dd(b); }
inline dd operator+(double a, dd b) { return dd(a) + b; }
inline dd operator-(dd a, double b) { return a - dd(b); }
inline dd operator-(double a, dd b) { return dd(a) - b; }
inline dd operator*(dd a, double b) { return a * dd(b); }
inline dd operator*(double a, dd b) { return dd(a) * b; }
inline dd operator/(dd a, double b) { return a / dd(b); }
inline dd operator/(double a, dd b) { return dd(a) / b; }

inline bool operator<(dd a, dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(dd a, dd b) { return b < a; }
inline bool operator<=(dd a, dd b) { return !(b < a); }
inline bool operator>=(dd a, dd b) { return !(a < b); }
inline bool operator==(dd a, dd b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(dd a, dd b) { return !(a == b); }

inline dd fabs(dd a) { return a.hi < 0.0 ? -a : a; }
inline bool isfinite(dd a) { return std::isfinite(a.hi); }

// exact scaling by a power of two
inline dd ldexp(dd a, int n) { return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)}; }

inline dd sqr(dd a) {
  dd p = detail::two_prod(a.hi, a.hi);
  p.lo += 2.0 * a.hi * a.lo;
  return detail::quick_two_sum(p.hi, p.lo);
}

inline dd sqrt(dd a) {
  if (a.hi == 0.0) return dd(0.0);
  // Karp's trick: one Newton step on an inverse-sqrt seed, all but one
  // multiplication in double.
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  return dd(ax) + (a - sqr(dd(ax))).hi * (x * 0.5);
}

namespace ddc {
// log(2) split into two doubles (high part rounded to nearest)
inline constexpr dd log2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr double eps = 4.93038065763132e-32;  // 2^-104
}  // namespace ddc

inline dd exp(dd a) {
  // e^a = 2^m * (e^r)^512 with r = (a - m log 2)/512, |r| <= log(2)/1024.
  if (a.hi <= -709.0) return dd(0.0);
  if (a.hi >= 709.8) return dd(std::numeric_limits<double>::infinity());
  double m = std::floor(a.hi / ddc::log2.hi + 0.5);
  dd r = ldexp(a - ddc::log2 * m, -9);
  // Taylor of e^r - 1; terms through r^8/8! keep the error below 2^-104
  // after the nine squarings.
  dd p = sqr(r);
  dd s = r + ldexp(p, -1);
  dd t = p * r;                        // r^3
  s += t * dd(1.0 / 6.0, 9.25185853854297066e-18);
  t *= r;                              // r^4
  s += t * dd(4.16666666666666644e-02, 2.31296463462743047e-18);
  t *= r;                              // r^5
  s += t * dd(8.33333333333333322e-03, 1.15648231731371524e-19);
  t *= r;                              // r^6
  s += t * dd(1.38888888888888894e-03, -5.30054395437357706e-20);
  t *= r;                              // r^7
  s += t * dd(1.98412698412698413e-04, 1.72095582934207053e-22);
  t *= r;                              // r^8
  s += t * dd(2.48015873015873016e-05, 2.15119478667758816e-23);
  // nine squarings: (1+s)^2 = 1 + (2s + s^2)
  for (int i = 0; i < 9; ++i) s = ldexp(s, 1) + sqr(s);
  return ldexp(s + 1.0, static_cast<int>(m));
}

inline dd log(dd a) {
  // Newton iteration x <- x + a e^{-x} - 1 on a double seed; one step
  // already doubles the 53-bit seed, the second mops up.
  double x0 = std::log(a.hi);
  dd x(x0);
  x = x + a * exp(-x) - 1.0;
  x = x + a * exp(-x) - 1.0;
  return x;
}

inline dd pow(dd a, dd b) { return exp(b * log(a)); }
inline dd pow(dd a, double b) { return exp(log(a) * b); }

inline dd log1p(dd a) { return log(a + 1.0); }
inline dd expm1(dd a) {
  if (std::fabs(a.hi) > 0.1) return exp(a) - 1.0;
  // small-argument path via the same reduced Taylor, without the final +1
  dd r = ldexp(a, -9);
  dd p = sqr(r);
  dd s = r + ldexp(p, -1);
  dd t = p * r;
  s += t * dd(1.0 / 6.0, 9.25185853854297066e-18);
  t *= r;
  s += t * dd(4.16666666666666644e-02, 2.31296463462743047e-18);
  t *= r;
  s += t * dd(8.33333333333333322e-03, 1.15648231731371524e-19);
  t *= r;
  s += t * dd(1.38888888888888894e-03, -5.30054395437357706e-20);
  for (int i = 0; i < 9; ++i) s = ldexp(s, 1) + sqr(s);
  return s;
}

inline double to_double(dd a) { return a.hi; }

}  // namespace supercrit
