#include "supercrit/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "supercrit/jet.hpp"
#include "supercrit/rootfind.hpp"

namespace supercrit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGMax = 1e280;  // keep g and its derivatives inside double
constexpr double kTSearchMax = 1e12;

template <class T>
T law_eval(const law::PureExp&, const T& t) {
  return t;
}

template <class T>
T law_eval(const law::PowerExp& L, const T& t) {
  using std::log;
  using std::pow;
  T r = pow(t, L.p) + L.log_coef;
  if (L.c != 0.0) r = r + L.c * pow(t, L.pbar);
  if (L.m != 0.0) r = r + L.m * log(t);
  return r;
}

template <class T>
T law_eval(const law::IterExp& L, const T& t) {
  using std::exp;
  using std::log;
  using std::pow;
  T phi = pow(t, L.m);
  if (L.l != 0.0) phi = phi * pow(log(t), L.l);
  for (int i = 0; i < L.depth; ++i) phi = exp(phi);
  return phi;
}

template <class T>
T law_eval(const law::ExpPlusPoly& L, const T& t) {
  using std::exp;
  T acc(0.0);
  for (auto it = L.w.rbegin(); it != L.w.rend(); ++it) acc = acc * t + *it;
  return exp(t) + acc;
}

}  // namespace

double Weight::operator()(double r) const {
  r = std::clamp(r, 0.0, 1.0);
  double acc = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * r + *it;
  if (!(acc > 0.0)) throw domain_error("weight h must be positive on [0,1]");
  return acc;
}

double Weight::log_at(double r) const { return std::log((*this)(r)); }

bool Weight::is_unit() const {
  if (coef.empty()) return false;
  if (coef[0] != 1.0) return false;
  for (std::size_t i = 1; i < coef.size(); ++i)
    if (coef[i] != 0.0) return false;
  return true;
}

GrowthModel::GrowthModel(LawVariant law, Family fam)
    : law_(std::move(law)), family_(fam) {
  formula_min_ = 0.0;
  if (const auto* it = std::get_if<law::IterExp>(&law_))
    if (it->l != 0.0) formula_min_ = 1.0;

  // overflow-safe upper end: largest t with g and g^(5) finite and g small
  // enough to be squared and cubed downstream
  auto safe = [this](double t) {
    double g0 = g_deriv_unsafe(t, 0), g5 = g_deriv_unsafe(t, 5);
    return std::isfinite(g0) && std::fabs(g0) < kGMax && std::isfinite(g5);
  };
  double lo = std::max(1.0, formula_min_ * 2.0 + 1e-6);
  if (!safe(lo)) {
    tmax_safe_ = lo;
  } else {
    double hi = lo;
    while (hi < kTSearchMax && safe(hi * 2.0)) hi *= 2.0;
    if (hi >= kTSearchMax) {
      tmax_safe_ = kTSearchMax;
    } else {
      double bad = hi * 2.0;
      for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (hi + bad);
        (safe(mid) ? hi : bad) = mid;
      }
      tmax_safe_ = hi;
    }
  }
  compute_t0();
}

// Raw derivative evaluation that never throws; used during construction
// before t0 exists.  Returns NaN when the formula is not defined.
double GrowthModel::g_deriv_unsafe(double t, int order) const {
  return std::visit(
      [&](const auto& L) -> double {
        using LT = std::decay_t<decltype(L)>;
        if constexpr (std::is_same_v<LT, law::Custom>) {
          const CustomGrowth& f = L.fns;
          switch (order) {
            case 0: return f.g(t);
            case 1: return f.g1(t);
            case 2: return f.g2(t);
            case 3:
              if (f.g3) return f.g3(t);
              break;
            case 4:
              if (f.g4) return f.g4(t);
              break;
            case 5:
              if (f.g5) return f.g5(t);
              break;
            default: throw domain_error("g_deriv: order must be in 0..5");
          }
          // central finite differences on g'' for the missing orders
          const double scale = 1.0 + std::fabs(t);
          if (order == 3) {
            double h = 6e-6 * scale;
            return (f.g2(t + h) - f.g2(t - h)) / (2.0 * h);
          }
          if (order == 4) {
            double h = 1.2e-4 * scale;
            return (f.g2(t + h) - 2.0 * f.g2(t) + f.g2(t - h)) / (h * h);
          }
          double h = 8e-4 * scale;
          return (f.g2(t + 2 * h) - 2.0 * f.g2(t + h) + 2.0 * f.g2(t - h) -
                  f.g2(t - 2 * h)) /
                 (2.0 * h * h * h);
        } else {
          if (order == 0) return law_eval(L, t);
          Jet5 j = law_eval(L, Jet5::variable(t));
          return j.deriv(order);
        }
      },
      law_);
}

void GrowthModel::compute_t0() {
  if (family_ == Family::pure_exp) {
    t0_ = 0.0;  // f = e^t is positive and smooth from 0 (g'' vanishes)
    return;
  }
  auto ok = [this](double t) {
    double g1 = g_deriv_unsafe(t, 1), g2 = g_deriv_unsafe(t, 2);
    return std::isfinite(g1) && std::isfinite(g2) && g1 > 0.0 && g2 > 0.0;
  };
  const double lo = std::max(1e-8, formula_min_ == 0.0 ? 1e-8
                                                       : formula_min_ + 1e-7);
  const double hi = std::min(tmax_safe_, 1e8);
  const int n = 481;
  int first = -1;
  double prev = lo;
  for (int i = 0; i < n; ++i) {
    double t = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    if (ok(t) && (i + 1 >= n || ok(std::min(hi, t * 1.2)))) {
      first = i;
      break;
    }
    prev = t;
  }
  if (first < 0) {
    t0_ = kInf;  // growth hypotheses hold nowhere; contract surface unusable
    return;
  }
  if (first == 0) {
    t0_ = 0.0;
    return;
  }
  double bad = prev;
  double good = lo * std::pow(hi / lo, static_cast<double>(first) / (n - 1));
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (bad + good);
    (ok(mid) ? good : bad) = mid;
  }
  t0_ = good;
}

GrowthModel GrowthModel::pure_exp() {
  return GrowthModel(law::PureExp{}, Family::pure_exp);
}

GrowthModel GrowthModel::power_exp(double m, double p, double c, double pbar,
                                   double log_coef) {
  if (!(p > 0.0)) throw domain_error("power_exp: p must be positive");
  if (c != 0.0 && !(pbar < p))
    throw domain_error("power_exp: requires pbar < p");
  return GrowthModel(law::PowerExp{m, p, c, pbar, log_coef}, Family::power_exp);
}

GrowthModel GrowthModel::iter_exp(int depth, double m, double l) {
  if (depth < 1) throw domain_error("iter_exp: depth must be >= 1");
  if (!(m > 0.0)) throw domain_error("iter_exp: m must be positive");
  return GrowthModel(law::IterExp{depth, m, l}, Family::iter_exp);
}

GrowthModel GrowthModel::exp_plus_poly(std::vector<double> w) {
  return GrowthModel(law::ExpPlusPoly{std::move(w)}, Family::exp_plus_poly);
}

GrowthModel GrowthModel::custom(CustomGrowth fns, std::optional<double> t0) {
  if (!fns.g || !fns.g1 || !fns.g2)
    throw domain_error("custom growth model requires g, g', g''");
  GrowthModel m(law::Custom{std::move(fns)}, Family::custom);
  if (t0) m.t0_ = *t0;
  return m;
}

GrowthModel GrowthModel::f0_reference(double B, double Bprime) {
  if (B == 1.0) return exp_plus_poly({std::log(4.0), -2.0});
  if (!(B > 1.0) || !(Bprime > 1.0))
    throw domain_error("f0_reference: needs B > 1, B' > 1 (or B == 1)");
  return power_exp(1.0 - 2.0 * Bprime, Bprime, 0.0, 0.0,
                   std::log(4.0 / (B * Bprime)));
}

GrowthModel GrowthModel::with_weight(Weight w) const {
  GrowthModel m = *this;
  m.weight_ = std::move(w);
  return m;
}

GrowthModel GrowthModel::with_t0(double t0) const {
  GrowthModel m = *this;
  m.t0_ = t0;
  return m;
}

double GrowthModel::g(double t) const {
  if (!(t >= t0_))
    throw domain_error("g(t): t below the growth threshold t0");
  return g_raw(t);
}

double GrowthModel::g_deriv(double t, int order) const {
  if (!(t >= t0_))
    throw domain_error("g_deriv(t): t below the growth threshold t0");
  return g_deriv_raw(t, order);
}

double GrowthModel::g_raw(double t) const { return g_deriv_unsafe(t, 0); }

double GrowthModel::g_deriv_raw(double t, int order) const {
  if (order < 0 || order > 5)
    throw domain_error("g_deriv: order must be in 0..5");
  return g_deriv_unsafe(t, order);
}

dd GrowthModel::g_raw(dd t) const {
  return std::visit(
      [&](const auto& L) -> dd {
        using LT = std::decay_t<decltype(L)>;
        if constexpr (std::is_same_v<LT, law::Custom>) {
          throw numeric_error(
              "paired-double evaluation requires a built-in growth family");
        } else {
          return law_eval(L, t);
        }
      },
      law_);
}

dd GrowthModel::g_prime_raw(dd t) const {
  switch (family_) {
    case Family::pure_exp:
      return dd(1.0);
    case Family::power_exp: {
      const auto& L = std::get<law::PowerExp>(law_);
      dd r = L.p * pow(t, L.p - 1.0);
      if (L.c != 0.0) r += L.c * L.pbar * pow(t, L.pbar - 1.0);
      if (L.m != 0.0) r += dd(L.m) / t;
      return r;
    }
    case Family::iter_exp: {
      const auto& L = std::get<law::IterExp>(law_);
      dd lt = log(t);
      dd phi = pow(t, L.m);
      dd dphi = L.m * pow(t, L.m - 1.0);
      if (L.l != 0.0) {
        dd ll = pow(lt, L.l);
        dphi = dphi * ll + phi * L.l * pow(lt, L.l - 1.0) / t;
        phi = phi * ll;
      }
      dd chain = dphi;
      for (int i = 0; i < L.depth; ++i) {
        phi = exp(phi);
        chain = chain * phi;
      }
      return chain;
    }
    case Family::exp_plus_poly: {
      const auto& L = std::get<law::ExpPlusPoly>(law_);
      dd acc(0.0);
      for (int j = static_cast<int>(L.w.size()) - 1; j >= 1; --j)
        acc = acc * t + L.w[static_cast<std::size_t>(j)] * static_cast<double>(j);
      return exp(t) + acc;
    }
    default:
      throw numeric_error(
          "paired-double evaluation requires a built-in growth family");
  }
}

double GrowthModel::g_delta(double t, double dt) const {
  switch (family_) {
    case Family::pure_exp:
      return dt;
    case Family::power_exp: {
      const auto& L = std::get<law::PowerExp>(law_);
      double lr = std::log1p(dt / t);
      double d = std::pow(t, L.p) * std::expm1(L.p * lr);
      if (L.c != 0.0) d += L.c * std::pow(t, L.pbar) * std::expm1(L.pbar * lr);
      if (L.m != 0.0) d += L.m * lr;
      return d;
    }
    case Family::iter_exp: {
      const auto& L = std::get<law::IterExp>(law_);
      double lr = std::log1p(dt / t);
      double arg = L.m * lr;
      double phi = std::pow(t, L.m);
      if (L.l != 0.0) {
        double lt = std::log(t);
        arg += L.l * std::log1p(std::log1p(dt / t) / lt);
        phi *= std::pow(lt, L.l);
      }
      double d = phi * std::expm1(arg);
      double a = phi;
      for (int i = 0; i < L.depth; ++i) {
        double ea = std::exp(a);
        d = ea * std::expm1(d);
        a = ea;
      }
      return d;
    }
    case Family::exp_plus_poly: {
      const auto& L = std::get<law::ExpPlusPoly>(law_);
      double d = std::exp(t) * std::expm1(dt);
      // polynomial increment by explicit binomial expansion (exact, no
      // cancellation between the large endpoint values)
      for (std::size_t j = 1; j < L.w.size(); ++j) {
        double wj = L.w[j];
        if (wj == 0.0) continue;
        double binom = 1.0;
        double acc = 0.0;
        for (std::size_t i = 1; i <= j; ++i) {
          binom *= static_cast<double>(j - i + 1) / static_cast<double>(i);
          acc += binom * std::pow(t, static_cast<double>(j - i)) *
                 std::pow(dt, static_cast<double>(i));
        }
        d += wj * acc;
      }
      return d;
    }
    default:
      return g_raw(t + dt) - g_raw(t);
  }
}

double GrowthModel::formula_domain_min() const { return formula_min_; }

double GrowthModel::overflow_safe_tmax() const { return tmax_safe_; }

bool GrowthModel::closed_form_class(GrowthClass& out) const {
  switch (family_) {
    case Family::power_exp: {
      const auto& L = std::get<law::PowerExp>(law_);
      if (!(L.p > 1.0)) return false;
      out.p = L.p;
      out.q = L.p / (L.p - 1.0);
      out.residual = std::fabs(1.0 / out.p + 1.0 / out.q - 1.0);
      out.in_class = out.q >= 1.0 && out.q < 2.0;
      out.closed_form = true;
      out.note = out.in_class ? "closed form" : "closed form, q outside [1,2)";
      return true;
    }
    case Family::iter_exp:
    case Family::exp_plus_poly:
      out.q = 1.0;
      out.p = kInf;
      out.residual = 0.0;
      out.in_class = true;
      out.closed_form = true;
      out.note = "closed form";
      return true;
    case Family::pure_exp:
      out.q = kNaN;
      out.p = kNaN;
      out.residual = kNaN;
      out.in_class = false;
      out.closed_form = true;
      out.note = "g'' == 0: outside the growth class (Gelfand)";
      return true;
    default:
      return false;
  }
}

double GrowthModel::g_inverse(double y) const {
  double lo = std::max({t0_, formula_min_ * (1.0 + 1e-12) + 1e-300, 1e-12});
  double hi = tmax_safe_;
  double glo = g_raw(lo);
  if (y <= glo) {
    // g is increasing past t0; nothing below lo maps to y
    if (y == glo) return lo;
    throw domain_error("g_inverse: value below g(t0)");
  }
  if (y > g_raw(hi)) throw domain_error("g_inverse: value above safe range");
  auto fn = [&](double t) { return g_raw(t) - y; };
  return find_root_bracketed(fn, lo, hi, 1e-15).x;
}

std::string GrowthModel::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& L) {
        using LT = std::decay_t<decltype(L)>;
        if constexpr (std::is_same_v<LT, law::PureExp>) {
          os << "pure_exp";
        } else if constexpr (std::is_same_v<LT, law::PowerExp>) {
          os << "power_exp(m=" << L.m << ", p=" << L.p << ", c=" << L.c
             << ", pbar=" << L.pbar << ", log_coef=" << L.log_coef << ")";
        } else if constexpr (std::is_same_v<LT, law::IterExp>) {
          os << "iter_exp(depth=" << L.depth << ", m=" << L.m << ", l=" << L.l
             << ")";
        } else if constexpr (std::is_same_v<LT, law::ExpPlusPoly>) {
          os << "exp_plus_poly(w=[";
          for (std::size_t i = 0; i < L.w.size(); ++i)
            os << (i ? "," : "") << L.w[i];
          os << "])";
        } else {
          os << "custom";
        }
      },
      law_);
  return os.str();
}

const law::PowerExp* GrowthModel::as_power_exp() const {
  return std::get_if<law::PowerExp>(&law_);
}
const law::IterExp* GrowthModel::as_iter_exp() const {
  return std::get_if<law::IterExp>(&law_);
}
const law::ExpPlusPoly* GrowthModel::as_exp_plus_poly() const {
  return std::get_if<law::ExpPlusPoly>(&law_);
}

std::vector<double> default_probe(const GrowthModel& model, int points) {
  if (points < 8) points = 8;
  double lo = std::max({1.0, 2.0 * model.t0(), model.formula_domain_min() * 4.0});
  if (!std::isfinite(lo) || lo <= 0.0) lo = 1.0;
  double hi = 0.95 * model.overflow_safe_tmax();
  if (hi <= lo * 1.5) hi = lo * 1.5;
  double cap = std::min(hi, lo * 1e6);  // at most six decades
  std::vector<double> probe(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    probe[static_cast<std::size_t>(i)] =
        lo * std::pow(cap / lo, static_cast<double>(i) / (points - 1));
  return probe;
}

namespace {

// least-squares fit of y = a + b u; returns a
double tail_fit(std::span<const double> u, std::span<const double> y) {
  const std::size_t n = u.size();
  double su = 0, sy = 0, suu = 0, suy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    su += u[i];
    sy += y[i];
    suu += u[i] * u[i];
    suy += u[i] * y[i];
  }
  double det = n * suu - su * su;
  if (std::fabs(det) < 1e-300) return sy / static_cast<double>(n);
  return (sy * suu - su * suy) / det;
}

}  // namespace

GrowthClass classify_numeric(const GrowthModel& model,
                             std::span<const double> probe) {
  if (probe.size() < 8)
    throw domain_error("classify: probe needs at least 8 points");
  for (std::size_t i = 0; i + 1 < probe.size(); ++i)
    if (!(probe[i] < probe[i + 1]))
      throw domain_error("classify: probe must be strictly increasing");
  if (!(probe.front() >= model.t0()))
    throw domain_error("classify: probe must start at or above t0");
  const bool capped = probe.back() >= 0.9 * model.overflow_safe_tmax();
  if (probe.back() < 1e3 * probe.front() && !capped)
    throw domain_error(
        "classify: probe should span three decades (or reach the model's "
        "overflow-safe maximum)");

  GrowthClass out;
  // numeric route: ratios g'/g and g'/g'' keep everything inside double
  std::vector<double> L, P, invg;
  for (double t : probe) {
    double g0 = model.g_raw(t);
    double g1 = model.g_deriv_raw(t, 1);
    double g2 = model.g_deriv_raw(t, 2);
    if (!(g2 > 0.0)) {
      out.in_class = false;
      out.note = "g'' <= 0 on the probe: not in the growth class";
      return out;
    }
    L.push_back((g1 / g0) * (g1 / g2));
    P.push_back(t * g1 / g0);
    invg.push_back(1.0 / g0);
  }
  const std::size_t tail = std::max<std::size_t>(4, probe.size() / 2);
  const std::size_t off = probe.size() - tail;
  std::span<const double> u(invg.data() + off, tail);
  out.q = tail_fit(u, {L.data() + off, tail});

  // p: diverging t g'/g means p = inf (the q = 1 branch)
  double p_first = P[off], p_last = P.back();
  bool diverging = p_last > 50.0 && p_last > 1.2 * p_first;
  if (diverging || std::fabs(out.q - 1.0) <= 1e-3) {
    out.p = kInf;
    out.q = std::fabs(out.q - 1.0) <= 1e-3 ? 1.0 : out.q;
  } else {
    out.p = tail_fit(u, {P.data() + off, tail});
  }
  out.residual = std::fabs((std::isinf(out.p) ? 0.0 : 1.0 / out.p) +
                           1.0 / out.q - 1.0);
  out.in_class = out.q >= 1.0 - 1e-3 && out.q < 2.0;
  if (out.q > 1.0 - 1e-3 && out.q < 1.0) out.q = 1.0;
  out.note = out.in_class ? "tail extrapolation" : "estimated q outside [1,2)";
  return out;
}

GrowthClass classify(const GrowthModel& model, std::span<const double> probe) {
  GrowthClass cf;
  if (model.closed_form_class(cf)) return cf;
  return classify_numeric(model, probe);
}

GrowthClass classify(const GrowthModel& model) {
  return classify(model, default_probe(model));
}

H2Report check_H2(const GrowthModel& model, std::span<const double> t_grid) {
  H2Report rep;
  double best = kInf;
  std::size_t arg = 0;
  std::vector<double> logv(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    logv[i] = model.g_raw(t) - std::log(t);
    if (logv[i] < best) {
      best = logv[i];
      arg = i;
    }
  }
  rep.inf_estimate = std::exp(best);
  rep.argmin = t_grid[arg];
  if (arg == 0 && t_grid.size() >= 5) {
    // minimum at the left edge: check whether f(t)/t keeps falling as t -> 0
    double slope = (logv[4] - logv[0]) /
                   (std::log(t_grid[4]) - std::log(t_grid[0]));
    if (slope > 1e-2) {
      rep.boundary_limit = true;
      rep.inf_estimate = 0.0;
    }
  }
  rep.pass = !rep.boundary_limit && rep.inf_estimate > 0.0;
  return rep;
}

H2Report check_H2(const GrowthModel& model, double t_high) {
  double lo = std::max(1e-10, model.formula_domain_min() * (1.0 + 1e-9) + 1e-300);
  if (model.formula_domain_min() > 0.0) lo = model.formula_domain_min() + 1e-9;
  const int n = 600;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] =
        lo * std::pow(t_high / lo, static_cast<double>(i) / (n - 1));
  return check_H2(model, grid);
}

bool check_tgp_monotone(const GrowthModel& model,
                        std::span<const double> t_grid) {
  double prev = -kInf;
  for (double t : t_grid) {
    double g0 = model.g_raw(t);
    if (!(g0 > 0.0)) continue;  // ratio only meaningful once g > 0
    double v = t * model.g_deriv_raw(t, 1) / g0;
    if (v < prev * (1.0 - 1e-9) - 1e-12) return false;
    prev = std::max(prev, v);
  }
  return true;
}

}  // namespace supercrit
