#include "supercrit/profiles.hpp"

#include <cmath>
#include <limits>

namespace supercrit {

namespace {

// log(1 + e^u) without overflow
double log1p_exp(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

// 1/(1 + e^{-u})
double logistic(double u) {
  return u > 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

}  // namespace

LimitProfile::LimitProfile(int k, double a_k) : k_(k), a_(a_k) {
  if (!(a_k > 0.0 && a_k <= 2.0))
    throw domain_error("LimitProfile: a_k must lie in (0, 2]");
  log_b_ = a_ * std::log(std::sqrt(2.0) / a_);
}

double LimitProfile::b() const { return std::exp(log_b_); }

double LimitProfile::normalization_radius() const {
  return a_ / std::sqrt(2.0);
}

double LimitProfile::log_s(double r) const { return log_b_ + a_ * std::log(r); }

double LimitProfile::z(double r) const {
  if (r < 0.0) throw domain_error("z(r): requires r >= 0");
  if (r == 0.0) {
    if (a_ < 2.0)
      throw domain_error("z(r): singular at the origin for k >= 2");
    return std::log(2.0 * a_ * a_ * b());
  }
  return std::log(2.0 * a_ * a_) + log_b_ - (2.0 - a_) * std::log(r) -
         2.0 * log1p_exp(log_s(r));
}

double LimitProfile::z_prime(double r) const {
  if (!(r > 0.0)) throw domain_error("z_prime: requires r > 0");
  return (-(2.0 - a_) - 2.0 * a_ * logistic(log_s(r))) / r;
}

double LimitProfile::z_double_prime(double r) const {
  if (!(r > 0.0)) throw domain_error("z_double_prime: requires r > 0");
  double T = logistic(log_s(r));              // s/(1+s)
  double dT = a_ * T * (1.0 - T);             // r dT/dr
  return ((2.0 - a_) + 2.0 * a_ * T - 2.0 * a_ * dT) / (r * r);
}

double LimitProfile::ode_residual(double r) const {
  double ez = std::exp(z(r));
  return -z_double_prime(r) - z_prime(r) / r - ez;
}

double LimitProfile::mass(double R) const {
  if (R <= 0.0) return 0.0;
  if (std::isinf(R)) return 2.0 * a_;
  // -2a/(1+s) from 0 to R  =  2a s/(1+s) at R
  return 2.0 * a_ * logistic(log_s(R));
}

}  // namespace supercrit
