#include "supercrit/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "supercrit/quadrature.hpp"
#include "supercrit/rootfind.hpp"

namespace supercrit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailCutoff = 60.0;  // exponential tail truncation, log-units
}  // namespace

BigF big_F(const GrowthModel& model, double t) {
  if (!(t >= model.t0()))
    throw domain_error("big_F: t below the growth threshold t0");
  double gp = model.g_deriv_raw(t, 1);
  if (!(gp > 0.0)) throw domain_error("big_F: g'(t) must be positive");

  // F(t) = e^{-g(t)}/g'(t) * C(t),  C = int_0^inf e^{-Delta(y)} dy with
  // Delta(y) = g(t + y/g') - g(t) >= y by convexity.
  auto delta = [&](double y) { return model.g_delta(t, y / gp); };
  auto head = [&](double y) { return std::exp(-delta(y)); };
  QuadResult qc = integrate_exponential_tail(head, kTailCutoff, 1e-12);

  // sanity of the tail: convexity makes Delta(y) >= y
  if (!(delta(kTailCutoff) > 0.5 * kTailCutoff))
    throw domain_error("big_F: integrand tail does not decay (g not convex?)");

  // D = 1 - f'F = int_0^inf e^{-y} (1 - e^{-(Delta - y)}) dy, integrated
  // directly so the O(g''/g'^2) quantity never comes from a difference of
  // near-equal numbers
  auto small = [&](double y) {
    double excess = delta(y) - y;
    return -std::exp(-y) * std::expm1(-excess);
  };
  QuadResult qd = integrate_exponential_tail(small, kTailCutoff, 1e-11);

  BigF out;
  out.C = qc.value;
  out.D = qd.value;
  out.log_F = -model.g_raw(t) - std::log(gp) + std::log(qc.value);
  out.low_confidence = out.D < 1e-8 || !qc.converged || !qd.converged;
  return out;
}

double log_big_F(const GrowthModel& model, double t) {
  return big_F(model, t).log_F;
}

double big_F_inv(const GrowthModel& model, double log_y) {
  double t_lo = std::max(model.t0(), model.formula_domain_min() + 1e-9);
  if (t_lo <= 0.0) t_lo = 1e-3;
  else t_lo *= 1.0 + 1e-9;
  double logF_lo = log_big_F(model, t_lo);
  if (log_y > logF_lo)
    throw domain_error("big_F_inv: value above log F(t0)");

  // Newton on log F(t) = log_y with the exact derivative -g'/C, seeded by
  // inverting the leading term -g(t) = log_y
  double t;
  try {
    t = model.g_inverse(std::max(-log_y, model.g_raw(t_lo) + 0.1));
  } catch (const domain_error&) {
    t = 2.0 * t_lo + 1.0;
  }
  t = std::max(t, t_lo);
  double res = 0.0;
  for (int it = 0; it < 40; ++it) {
    BigF F = big_F(model, t);
    res = F.log_F - log_y;
    if (std::fabs(res) < 1e-12) return t;
    double slope = -model.g_deriv_raw(t, 1) / F.C;
    double step = -res / slope;
    double t_next = t + step;
    if (!(t_next > t_lo)) t_next = 0.5 * (t + t_lo);
    t = t_next;
  }
  if (std::fabs(res) < 1e-8) return t;
  throw numeric_error("big_F_inv: Newton failed to converge");
}

BFunctionals b_functionals(const GrowthModel& model, double t) {
  BigF F = big_F(model, t);
  double gp = model.g_deriv_raw(t, 1);
  double gpp = model.g_deriv_raw(t, 2);
  double neg_logF = -F.log_F;

  BFunctionals out;
  out.log_F = F.log_F;
  out.fF_gprime = F.C;  // f F g' = f' F = C
  out.inv_b1 = neg_logF * F.D;
  // f f'' F / f' - 1 = (g''/g'^2) C - D, exactly
  double bracket = (gpp / (gp * gp)) * F.C - F.D;
  out.inv_b2 = F.C * neg_logF * neg_logF * bracket;
  out.low_confidence =
      F.low_confidence || std::fabs(bracket) < 1e-10 * (gpp / (gp * gp));
  return out;
}

SingularApprox::SingularApprox(GrowthModel model, GrowthModel f0, double B,
                               double Bprime)
    : model_(std::move(model)), f0_(std::move(f0)), B_(B), Bprime_(Bprime) {
  // feasibility probe for the validity radius: u0 must clear both growth
  // thresholds and w must lie in the range of F
  double r = B_ > 1.0 ? 0.45 : 0.5;
  for (int i = 0; i < 80; ++i, r *= 0.9) {
    try {
      double t0_ref = f0_.t0();
      if (!(u0(r) > t0_ref + 1e-6)) continue;
      double tu = tilde_u(r);
      if (!(tu > model_.t0())) continue;
      r_max_ = r;
      return;
    } catch (const domain_error&) {
    } catch (const numeric_error&) {
    }
  }
  throw domain_error("SingularApprox: no feasible validity radius");
}

SingularApprox SingularApprox::make(const GrowthModel& model) {
  GrowthClass cls = classify(model);
  if (!cls.in_class)
    throw domain_error("SingularApprox: model not in the growth class");
  if (cls.q == 1.0) return make(model, 1.0, kInf);
  return make(model, cls.q, cls.p);
}

SingularApprox SingularApprox::make(const GrowthModel& model, double B,
                                    double Bprime) {
  return SingularApprox(model, GrowthModel::f0_reference(B, Bprime), B, Bprime);
}

double SingularApprox::u0(double r) const {
  if (!(r > 0.0 && r < 1.0)) throw domain_error("u0: requires 0 < r < 1");
  double L = std::log(1.0 / (r * r));
  if (B_ > 1.0) return std::pow(L, 1.0 / Bprime_);
  if (!(L > 1.0)) throw domain_error("u0: log log undefined this far out");
  return std::log(L);
}

double SingularApprox::w(double r) const {
  return std::exp(log_w(r));
}

double SingularApprox::log_w(double r) const {
  if (!(r > 0.0 && r < 1.0)) throw domain_error("w: requires 0 < r < 1");
  double L = std::log(1.0 / (r * r));
  return std::log(B_ / 4.0) + 2.0 * std::log(r) + std::log(L + 1.0);
}

double SingularApprox::tilde_u(double r) const {
  return big_F_inv(model_, log_w(r));
}

double SingularApprox::tilde_u_prime(double r) const {
  // u~' = w'/F'(u~) = -w'(r) f(u~);  w' = (B/2) r log(1/r^2)
  double L = std::log(1.0 / (r * r));
  double wp = 0.5 * B_ * r * L;
  double tu = tilde_u(r);
  return -wp * std::exp(model_.g_raw(tu));
}

std::pair<double, double> SingularApprox::remainders(double r) const {
  if (!(r > 0.0 && r < r_max_))
    throw domain_error("remainders: r outside (0, r_max)");
  BFunctionals a = b_functionals(model_, tilde_u(r));
  BFunctionals b = b_functionals(f0_, u0(r));
  return {std::fabs(a.inv_b1 - b.inv_b1), std::fabs(a.inv_b2 - b.inv_b2)};
}

double SingularApprox::weighted_remainder(double r) const {
  auto [r1, r2] = remainders(r);
  return std::sqrt(std::log(1.0 / r)) * (r1 + r2);
}

double SingularApprox::choose_matching_radius(double threshold,
                                              double r_lo) const {
  // smallest weighted remainder wins ties towards the outside: walk down
  // from r_max until the weighted remainder stays below the threshold
  double r = 0.9 * r_max_;
  double best = kInf;
  while (r > r_lo) {
    double wr = weighted_remainder(r);
    if (wr < threshold) return r;
    best = std::min(best, wr);
    r *= 0.8;
  }
  std::ostringstream os;
  os << "choose_matching_radius: weighted remainder stays above " << threshold
     << " (best " << best << ")";
  throw numeric_error(os.str());
}

double SingularSolution::operator()(double r) const {
  if (!(r > 0.0)) throw domain_error("SingularSolution: requires r > 0");
  if (r >= R_star) {
    if (r > R_star * (1.0 + 1e-12))
      throw domain_error("SingularSolution: beyond the zero radius");
    return 0.0;
  }
  if (r < r_bar) {
    // inner region is the approximant u~ = F^{-1}(w(r))
    double L = std::log(1.0 / (r * r));
    double lw = std::log(B / 4.0) + 2.0 * std::log(r) + std::log(L + 1.0);
    return big_F_inv(model, lw);
  }
  const Sample& last = samples.back();
  if (r >= last.r) {
    // the closing stretch between the integration floor and R*
    return last.v * (R_star - r) / std::max(R_star - last.r, 1e-300);
  }
  double x = std::log(r);
  // Hermite interpolation over the outward samples
  std::size_t lo = 0, hi = samples.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (samples[mid].x <= x ? lo : hi) = mid;
  }
  const Sample &s0 = samples[lo], &s1 = samples[lo + 1];
  double h = s1.x - s0.x;
  double t = (x - s0.x) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * s0.v + (t3 - 2 * t2 + t) * h * s0.w +
         (-2 * t3 + 3 * t2) * s1.v + (t3 - t2) * h * s1.w;
}

double SingularSolution::derivative(double r) const {
  if (!(r >= r_bar && r < R_star))
    throw domain_error("SingularSolution::derivative: outside [r_bar, R*)");
  double x = std::log(r);
  std::size_t lo = 0, hi = samples.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (samples[mid].x <= x ? lo : hi) = mid;
  }
  const Sample &s0 = samples[lo], &s1 = samples[lo + 1];
  double h = s1.x - s0.x;
  double t = (x - s0.x) / h;
  double d00 = (6 * t * t - 6 * t) / h, d10 = 3 * t * t - 4 * t + 1;
  double d01 = (-6 * t * t + 6 * t) / h, d11 = 3 * t * t - 2 * t;
  double w = d00 * s0.v + d10 * s0.w + d01 * s1.v + d11 * s1.w;
  return w / r;
}

std::function<double(double)> SingularSolution::sampler() const {
  return [self = *this](double r) { return self(r); };
}

namespace {

// Closes the last stretch of the outward integration, where f(V) may be
// singular as V -> 0: with V'' ~ -f(V) dominant,
//   V'(v)^2 = V'(v_stop)^2 + 2 int_v^{v_stop} f(s) ds,
// so the remaining radius is int_0^{v_stop} dv/|V'(v)| and the boundary
// slope is -sqrt(V'(0)^2).
struct TailResult {
  double delta_r = 0.0;
  double slope = 0.0;
};

TailResult energy_tail(const GrowthModel& model, double v_stop,
                       double slope_stop) {
  TailResult out;
  auto f_int = [&](double a, double b) {
    auto f = [&](double s) { return std::exp(model.g_raw(s)); };
    return integrate_adaptive(f, a, b, 1e-10).value;
  };
  double base = slope_stop * slope_stop;
  auto inv_speed = [&](double v) {
    return 1.0 / std::sqrt(base + 2.0 * f_int(v, v_stop));
  };
  out.delta_r = integrate_adaptive(inv_speed, 0.0, v_stop, 1e-9).value;
  // this branch only runs for laws with a non-integrable singularity of f
  // at zero, where V' genuinely diverges at the boundary
  out.slope = -kInf;
  return out;
}

}  // namespace

SingularSolution extend(const SingularApprox& approx, double r_bar,
                        const SolverConfig& config) {
  if (!(r_bar > 0.0 && r_bar < approx.r_max()))
    throw domain_error("extend: r_bar outside (0, r_max)");
  const GrowthModel& m = approx.model();
  double v0 = approx.tilde_u(r_bar);
  double vp0 = approx.tilde_u_prime(r_bar);
  if (!(vp0 < 0.0))
    throw domain_error("extend: u~'(r_bar) not negative (r_bar too large)");

  // singular-at-zero laws stop at a floor and close with the energy tail
  bool singular_at_zero = m.g_raw(1e-300) > m.g_raw(v0) + 100.0 ||
                          m.formula_domain_min() > 0.0;
  double v_floor = singular_at_zero ? 1e-4 : 0.0;

  double x0 = std::log(r_bar);
  RawTrajectory traj =
      integrate_raw(m, x0, v0, r_bar * vp0, v_floor, config);

  SingularSolution sol;
  sol.model = m;
  sol.B = approx.B();
  sol.Bprime = approx.Bprime();
  sol.r_bar = r_bar;
  sol.samples = std::move(traj.samples);

  const Sample& last = sol.samples.back();
  if (v_floor > 0.0) {
    TailResult tail = energy_tail(m, last.v, last.w / last.r);
    sol.R_star = last.r + tail.delta_r;
    sol.slope_at_zero = tail.slope;
  } else {
    sol.R_star = last.r;
    sol.slope_at_zero = last.w / last.r;
  }
  sol.lambda_star = sol.R_star * sol.R_star;

  // integrated-form residual: -rV'(r) - (-r_bar V'(r_bar)) = int f(V) s ds
  double worst = 0.0;
  const auto& S = sol.samples;
  double acc = 0.0;
  auto integrand = [&](const Sample& s) {
    return std::exp(2.0 * s.x + m.g_raw(std::max(s.v, 1e-300)));
  };
  auto dintegrand = [&](const Sample& s) {
    return integrand(s) *
           (2.0 + m.g_deriv_raw(std::max(s.v, 1e-300), 1) * s.w);
  };
  for (std::size_t i = 1; i < S.size(); ++i) {
    double h = S[i].x - S[i - 1].x;
    acc += 0.5 * h * (integrand(S[i - 1]) + integrand(S[i])) +
           h * h / 12.0 * (dintegrand(S[i - 1]) - dintegrand(S[i]));
    double lhs = -S[i].w + S[0].w;
    worst = std::max(worst, std::fabs(lhs - acc) /
                                std::max(std::fabs(lhs), 1e-12));
  }
  sol.max_ode_residual = worst;
  return sol;
}

SingularSolution extend(const SingularApprox& approx,
                        const SolverConfig& config) {
  return extend(approx, approx.choose_matching_radius(), config);
}

ConditionCReport check_condition_C(const std::function<double(double)>& U,
                                   const GrowthModel& model,
                                   std::span<const double> alphas, double beta,
                                   double r_lo, double r_hi,
                                   int points_per_decade) {
  if (!(r_lo > 0.0 && r_lo < r_hi))
    throw domain_error("check_condition_C: bad window");
  int n = std::max(8, static_cast<int>(points_per_decade *
                                       std::log10(r_hi / r_lo)));
  std::vector<double> rs(static_cast<std::size_t>(n));
  std::vector<double> gU(rs.size()), lgpU(rs.size());
  for (int i = 0; i < n; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (n - 1));
    rs[static_cast<std::size_t>(i)] = r;
    double u = U(r);
    bool ok = u >= model.t0() && std::isfinite(u);
    double g = ok ? model.g_raw(u) : std::numeric_limits<double>::quiet_NaN();
    double gp = ok ? model.g_deriv_raw(u, 1) : 0.0;
    gU[static_cast<std::size_t>(i)] = g;
    lgpU[static_cast<std::size_t>(i)] = gp > 0.0 ? std::log(gp)
                                                 : std::numeric_limits<double>::quiet_NaN();
  }

  ConditionCReport rep;
  rep.beta = beta;
  bool all_lower = true;
  for (double alpha : alphas) {
    ConditionCReport::LowerBound lb;
    lb.alpha = alpha;
    std::size_t i = 0;
    for (; i < rs.size(); ++i) {
      bool holds = std::isfinite(gU[i]) &&
                   alpha * std::log(1.0 / rs[i]) <= gU[i];
      if (!holds) break;
    }
    lb.holds_somewhere = i > 0;
    lb.r_bar = i > 0 ? rs[i - 1] : 0.0;
    lb.violating_r = i < rs.size() ? rs[i] : 0.0;
    all_lower = all_lower && lb.holds_somewhere;
    rep.lower.push_back(lb);
  }
  {
    std::size_t i = 0;
    for (; i < rs.size(); ++i) {
      bool holds = std::isfinite(gU[i]) && std::isfinite(lgpU[i]) &&
                   gU[i] + lgpU[i] <= 2.0 * std::log(1.0 / rs[i]) + beta;
      if (!holds) break;
    }
    rep.upper_holds = i > 0;
    rep.upper_r_bar = i > 0 ? rs[i - 1] : 0.0;
  }
  rep.pass = all_lower && rep.upper_holds;
  return rep;
}

std::array<double, 5> cascade_scaled(
    const GrowthModel& model, double t,
    const std::function<double(int)>& log_norm) {
  double gp = model.g_deriv_raw(t, 1);
  if (!(gp > 0.0)) throw domain_error("cascade_scaled: needs g' > 0");
  double u2 = model.g_deriv_raw(t, 2) / gp;
  double u3 = model.g_deriv_raw(t, 3) / gp;
  double u4 = model.g_deriv_raw(t, 4) / gp;
  double u5 = model.g_deriv_raw(t, 5) / gp;
  double Q1 = 1.0;
  double Q2 = -u2;
  double Q3 = -u3 + 3.0 * u2 * u2;
  double Q4 = -u4 + 10.0 * u2 * u3 - 15.0 * u2 * u2 * u2;
  double Q5 = -u5 + 10.0 * u3 * u3 + 15.0 * u2 * u4 -
              105.0 * u2 * u2 * u3 + 105.0 * u2 * u2 * u2 * u2;
  double lg = std::log(gp);
  std::array<double, 5> rho{};
  const double Q[5] = {Q1, Q2, Q3, Q4, Q5};
  for (int i = 1; i <= 5; ++i)
    rho[static_cast<std::size_t>(i - 1)] =
        Q[i - 1] * std::exp(log_norm(i) - static_cast<double>(i) * lg);
  return rho;
}

}  // namespace supercrit
