#pragma once

// Generalized exponential nonlinearities f with g = log f.  Everything is
// evaluated through g and its derivatives so that f itself, which overflows
// double for moderate arguments in every supercritical family, never has to
// be formed.  Built-in families carry analytic derivatives up to order 5
// (obtained by jet arithmetic from the single templated formula); custom
// models supply g, g', g'' and get orders 3..5 by finite differences.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "supercrit/dd.hpp"
#include "supercrit/errors.hpp"

namespace supercrit {

enum class Family { pure_exp, power_exp, iter_exp, exp_plus_poly, custom };

// Radial weight h on [0,1] (polynomial in r, default constant 1).  Outside
// [0,1] the argument is clamped, which keeps shooting-coordinate evaluation
// well defined; for h == 1 this coincides with the disc problem exactly.
struct Weight {
  std::vector<double> coef{1.0};

  double operator()(double r) const;
  double log_at(double r) const;
  bool is_unit() const;
};

struct GrowthClass {
  double q = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();  // +inf encoded explicitly
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool in_class = false;
  bool closed_form = false;
  std::string note;
};

struct CustomGrowth {
  std::function<double(double)> g;   // required
  std::function<double(double)> g1;  // required
  std::function<double(double)> g2;  // required
  std::function<double(double)> g3;  // optional; finite-differenced if absent
  std::function<double(double)> g4;
  std::function<double(double)> g5;
};

namespace law {

struct PureExp {};  // g(t) = t

// g(t) = t^p + c t^pbar + m log t + log_coef
struct PowerExp {
  double m = 0.0, p = 3.0, c = 0.0, pbar = 0.0, log_coef = 0.0;
};

// g(t) = exp_depth(t^m (log t)^l)
struct IterExp {
  int depth = 1;
  double m = 1.0, l = 0.0;
};

// g(t) = e^t + w(t), w polynomial (coefficients in ascending order)
struct ExpPlusPoly {
  std::vector<double> w;
};

struct Custom {
  CustomGrowth fns;
};

}  // namespace law

class GrowthModel {
 public:
  static GrowthModel pure_exp();
  static GrowthModel power_exp(double m, double p, double c = 0.0,
                               double pbar = 0.0, double log_coef = 0.0);
  static GrowthModel iter_exp(int depth, double m, double l = 0.0);
  static GrowthModel exp_plus_poly(std::vector<double> w);
  static GrowthModel custom(CustomGrowth fns,
                            std::optional<double> t0 = std::nullopt);
  // The reference law f0 whose exact singular solution u0 anchors the
  // singular pipeline: for B > 1 a PowerExp with m = 1-2B', p = B'; for
  // B == 1 the double exponential 4 e^{e^t - 2t}.
  static GrowthModel f0_reference(double B, double Bprime);

  Family family() const { return family_; }
  const Weight& weight() const { return weight_; }
  GrowthModel with_weight(Weight w) const;
  GrowthModel with_t0(double t0) const;

  // threshold above which f > 0 and g is increasing and convex
  double t0() const { return t0_; }

  // Contract surface (requires t >= t0).
  double g(double t) const;
  double g_deriv(double t, int order) const;

  // Formula surface: evaluates the family formula wherever it is defined.
  // Shooting trajectories sweep v below t0 on the way to the first zero, so
  // solvers use these.
  double g_raw(double t) const;
  double g_deriv_raw(double t, int order) const;
  dd g_raw(dd t) const;
  dd g_prime_raw(dd t) const;

  // g(t + dt) - g(t) without forming the near-equal difference
  double g_delta(double t, double dt) const;

  // smallest t at which the family formula itself makes sense
  double formula_domain_min() const;
  // largest t at which g and its first five derivatives stay well inside
  // double range
  double overflow_safe_tmax() const;

  bool supports_dd() const { return family_ != Family::custom; }
  bool closed_form_class(GrowthClass& out) const;

  // solves g(t) = y on [max(t0, domain_min), overflow_safe_tmax]
  double g_inverse(double y) const;

  std::string describe() const;

  const law::PowerExp* as_power_exp() const;
  const law::IterExp* as_iter_exp() const;
  const law::ExpPlusPoly* as_exp_plus_poly() const;

 private:
  using LawVariant = std::variant<law::PureExp, law::PowerExp, law::IterExp,
                                  law::ExpPlusPoly, law::Custom>;
  GrowthModel(LawVariant law, Family fam);

  void compute_t0();
  double g_deriv_unsafe(double t, int order) const;

  LawVariant law_;
  Family family_;
  Weight weight_{};
  double t0_ = 0.0;
  double formula_min_ = 0.0;
  double tmax_safe_ = 0.0;
};

// Log-spaced classification probe honoring the model's overflow-safe range.
std::vector<double> default_probe(const GrowthModel& model, int points = 14);

// Estimates (q, p) = (lim g'^2/(g g''), lim t g'/g) by fitting a + b/g(t) on
// the probe tail; built-in families are overridden by their closed forms.
GrowthClass classify(const GrowthModel& model, std::span<const double> probe);
GrowthClass classify(const GrowthModel& model);
// the extrapolation route alone, without the closed-form override
GrowthClass classify_numeric(const GrowthModel& model,
                             std::span<const double> probe);

struct H2Report {
  double inf_estimate = 0.0;
  double argmin = 0.0;
  bool boundary_limit = false;  // minimum sits at the left edge and decreasing
  bool pass = false;
};

H2Report check_H2(const GrowthModel& model, std::span<const double> t_grid);
H2Report check_H2(const GrowthModel& model, double t_high = 50.0);

// Numerical proxy for (H1)(ii): is t g'(t)/g(t) nondecreasing on the grid?
bool check_tgp_monotone(const GrowthModel& model, std::span<const double> t_grid);

}  // namespace supercrit
