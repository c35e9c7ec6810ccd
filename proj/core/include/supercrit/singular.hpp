#pragma once

// Singular-solution machinery:  F(t) = int_t^inf ds/f(s) kept in log form,
// its inverse, the B1/B2 functionals computed through the substitution
// s = t + y/g'(t) (which turns 1 - f'F into a small integral instead of a
// catastrophic difference), the reference pair (f0, u0) with
// F0(u0(r)) = w(r) = (B/4) r^2 (log(1/r^2) + 1), the approximant
// u~ = F^{-1}(w), its outward extension to a genuine zero radius R*, and
// the asymptotic sandwich check (condition (C)).

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "supercrit/growth.hpp"
#include "supercrit/shooting.hpp"

namespace supercrit {

// log F(t); also exposes C(t) = f'(t) F(t) and D(t) = 1 - f'(t)F(t),
// both computed from the same substitution integral.
struct BigF {
  double log_F = 0.0;
  double C = 0.0;  // f'F = g' f F
  double D = 0.0;  // 1 - f'F, directly integrated
  bool low_confidence = false;
};

BigF big_F(const GrowthModel& model, double t);
double log_big_F(const GrowthModel& model, double t);

// root of log F(t) = log_y, seeded by inverting -g(t) - log g'(t)
double big_F_inv(const GrowthModel& model, double log_y);

struct BFunctionals {
  double inv_b1 = 0.0;  // (-log F)(1 - f'F)
  double inv_b2 = 0.0;  // f'F (-log F)^2 [f f'' F / f' - 1]
  double fF_gprime = 0.0;  // f F g'  ->  1
  double log_F = 0.0;
  bool low_confidence = false;
};

BFunctionals b_functionals(const GrowthModel& model, double t);

class SingularApprox {
 public:
  // classification decides the branch: B = q, B' = p for q > 1; B = 1 else
  static SingularApprox make(const GrowthModel& model);
  static SingularApprox make(const GrowthModel& model, double B, double Bprime);

  const GrowthModel& model() const { return model_; }
  const GrowthModel& f0() const { return f0_; }
  double B() const { return B_; }
  double Bprime() const { return Bprime_; }
  double r_max() const { return r_max_; }

  double u0(double r) const;
  double w(double r) const;          // (B/4) r^2 (log(1/r^2) + 1)
  double log_w(double r) const;
  double tilde_u(double r) const;    // F^{-1}[w(r)]
  double tilde_u_prime(double r) const;  // -w'(r) f(tilde_u(r))

  // R_i(r) = |1/B_i[f](u~(r)) - 1/B_i[f0](u0(r))|
  std::pair<double, double> remainders(double r) const;
  // (log(1/r))^{1/2} (R_1 + R_2)
  double weighted_remainder(double r) const;
  // largest radius in (r_lo, r_max) where the weighted remainder stays
  // below the threshold
  double choose_matching_radius(double threshold = 0.05,
                                double r_lo = 1e-6) const;

 private:
  SingularApprox(GrowthModel model, GrowthModel f0, double B, double Bprime);

  GrowthModel model_;
  GrowthModel f0_;
  double B_, Bprime_;
  double r_max_ = 0.5;
};

struct SingularSolution {
  GrowthModel model;
  double B = 0.0, Bprime = 0.0;
  double r_bar = 0.0;                // matching radius
  std::vector<Sample> samples;       // outward trajectory on [r_bar, ~R*]
  double R_star = 0.0;
  double lambda_star = 0.0;          // (R*)^2
  double slope_at_zero = 0.0;        // V'(R*)
  double max_ode_residual = 0.0;     // finite-difference diagnostic

  double operator()(double r) const;   // V*(r)
  double derivative(double r) const;
  std::function<double(double)> sampler() const;
};

// Integrates the approximant outward from r_bar with data
// (u~(r_bar), u~'(r_bar)) until V = 0; the last stretch below v_floor is
// closed by the 1-d energy tail (f may be singular at 0).
SingularSolution extend(const SingularApprox& approx, double r_bar,
                        const SolverConfig& config = {});
// picks r_bar by the weighted-remainder rule
SingularSolution extend(const SingularApprox& approx,
                        const SolverConfig& config = {});

struct ConditionCReport {
  struct LowerBound {
    double alpha = 0.0;
    bool holds_somewhere = false;  // an r_bar exists inside the window
    double r_bar = 0.0;            // largest such radius
    double violating_r = 0.0;      // smallest violation above r_bar (0 if none)
  };
  std::vector<LowerBound> lower;
  double beta = 0.0;
  bool upper_holds = false;
  double upper_r_bar = 0.0;
  bool pass = false;
};

// U_{alpha,0}(r) <= g(U(r)) and g(U(r)) + log g'(U(r)) <= U_{2,beta}(r)
// on a log grid of [r_lo, r_hi]
ConditionCReport check_condition_C(const std::function<double(double)>& U,
                                   const GrowthModel& model,
                                   std::span<const double> alphas, double beta,
                                   double r_lo, double r_hi,
                                   int points_per_decade = 16);

// The scaled derivative-cascade diagnostics g_1 = 1/g', g_{i+1} = g_i'/g'
// of the final sanity check: returns rho_i = g_i(t) * exp(log_norm(i)),
// i = 1..5, evaluated without forming the over/underflowing g_i directly.
std::array<double, 5> cascade_scaled(const GrowthModel& model, double t,
                                     const std::function<double(int)>& log_norm);

}  // namespace supercrit
