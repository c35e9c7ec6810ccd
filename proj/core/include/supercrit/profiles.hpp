#pragma once

// Closed-form limit profiles z_k(r) = log(2 a^2 b / (r^{2-a} (1 + b r^a)^2))
// with b = (sqrt(2)/a)^a: value, derivatives, Liouville residual and the
// elementary-antiderivative mass.  Extreme radii go through log1p on
// log-space composites so b r^a never overflows.

#include "supercrit/errors.hpp"

namespace supercrit {

class LimitProfile {
 public:
  LimitProfile(int k, double a_k);

  int k() const { return k_; }
  double a() const { return a_; }
  double b() const;
  double log_b() const { return log_b_; }

  // radius where z = 0 and where r^2 e^z peaks: a/sqrt(2)
  double normalization_radius() const;

  double z(double r) const;
  double z_prime(double r) const;
  double z_double_prime(double r) const;

  // -z'' - z'/r - e^z (identically 0 in exact arithmetic)
  double ode_residual(double r) const;

  // cumulative mass int_0^R e^z r dr via the antiderivative -2a/(1 + b r^a);
  // R = +inf gives exactly 2a
  double mass(double R) const;

 private:
  double log_s(double r) const;  // log(b r^a)

  int k_;
  double a_;
  double log_b_;
};

}  // namespace supercrit
