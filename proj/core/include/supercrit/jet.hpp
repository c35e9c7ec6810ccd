#pragma once

// Truncated Taylor ("jet") arithmetic of fixed order.  A Jet carries the
// scaled derivatives c[i] = f^(i)(t)/i! of a function along t, so composing
// elementary operations yields analytic derivatives of arbitrary closed-form
// growth laws without hand-coding fifth-order chain rules.

#include <array>
#include <cmath>
#include <cstddef>

namespace supercrit {

template <int N>
struct Jet {
  std::array<double, N + 1> c{};

  Jet() = default;
  explicit Jet(double value) { c[0] = value; }

  static Jet variable(double t) {
    Jet j(t);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }
  // unscaled k-th derivative
  double deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[static_cast<std::size_t>(k)] * f;
  }
};

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i) r.c[i] = -a.c[i];
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

template <int N>
Jet<N> operator*(double s, const Jet<N>& a) {
  Jet<N> r;
  for (int i = 0; i <= N; ++i) r.c[i] = s * a.c[i];
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, double s) { return s * a; }

template <int N>
Jet<N> operator+(const Jet<N>& a, double s) {
  Jet<N> r = a;
  r.c[0] += s;
  return r;
}

template <int N>
Jet<N> operator+(double s, const Jet<N>& a) { return a + s; }

template <int N>
Jet<N> operator-(const Jet<N>& a, double s) { return a + (-s); }

template <int N>
Jet<N> operator-(double s, const Jet<N>& a) { return (-a) + s; }

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  // recursive deconvolution: r = a/b
  Jet<N> r;
  for (int i = 0; i <= N; ++i) {
    double s = a.c[i];
    for (int j = 1; j <= i; ++j) s -= b.c[j] * r.c[i - j];
    r.c[i] = s / b.c[0];
  }
  return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, double s) { return (1.0 / s) * a; }

template <int N>
Jet<N> exp(const Jet<N>& a) {
  // e' = e * a'  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
  Jet<N> r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * r.c[k - j];
    r.c[k] = s / k;
  }
  return r;
}

template <int N>
Jet<N> log(const Jet<N>& a) {
  // l' = a'/a  =>  k a_0 l_k = k a_k - sum_{j=1..k-1} j l_j a_{k-j}
  Jet<N> r;
  r.c[0] = std::log(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double s = k * a.c[k];
    for (int j = 1; j < k; ++j) s -= j * r.c[j] * a.c[k - j];
    r.c[k] = s / (k * a.c[0]);
  }
  return r;
}

// a^e for real exponent, a.value() > 0
template <int N>
Jet<N> pow(const Jet<N>& a, double e) {
  return exp(e * log(a));
}

using Jet5 = Jet<5>;

}  // namespace supercrit
