#include "supercrit/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "supercrit/dd.hpp"

namespace supercrit {

namespace {

template <class Real>
struct State {
  Real x, v, w;
};

template <class Real>
struct Dp5Tableau {
  Real a21;
  Real a31, a32;
  Real a41, a42, a43;
  Real a51, a52, a53, a54;
  Real a61, a62, a63, a64, a65;
  Real b1, b3, b4, b5, b6;          // 5th-order weights (b2 = 0)
  Real e1, e3, e4, e5, e6, e7;      // b - b* (e2 = 0)
  Real c2, c3, c4, c5;

  static Dp5Tableau make() {
    auto rat = [](long num, long den) { return Real(double(num)) / Real(double(den)); };
    Dp5Tableau t;
    t.a21 = rat(1, 5);
    t.a31 = rat(3, 40); t.a32 = rat(9, 40);
    t.a41 = rat(44, 45); t.a42 = rat(-56, 15); t.a43 = rat(32, 9);
    t.a51 = rat(19372, 6561); t.a52 = rat(-25360, 2187);
    t.a53 = rat(64448, 6561); t.a54 = rat(-212, 729);
    t.a61 = rat(9017, 3168); t.a62 = rat(-355, 33); t.a63 = rat(46732, 5247);
    t.a64 = rat(49, 176); t.a65 = rat(-5103, 18656);
    t.b1 = rat(35, 384); t.b3 = rat(500, 1113); t.b4 = rat(125, 192);
    t.b5 = rat(-2187, 6784); t.b6 = rat(11, 84);
    t.e1 = t.b1 - rat(5179, 57600);
    t.e3 = t.b3 - rat(7571, 16695);
    t.e4 = t.b4 - rat(393, 640);
    t.e5 = t.b5 - rat(-92097, 339200);
    t.e6 = t.b6 - rat(187, 2100);
    t.e7 = Real(0.0) - rat(1, 40);
    t.c2 = rat(1, 5); t.c3 = rat(3, 10); t.c4 = rat(4, 5); t.c5 = rat(8, 9);
    return t;
  }
};

inline double to_double(double x) { return x; }

// Source adapters: dw/dx = -exp(2x + g(v) + log h(e^x)).  The event
// refinement may probe a hair below v = 0; the source is frozen at its
// v = 0 value there (the overshoot is below the event tolerance).
struct SourceD {
  const GrowthModel& m;
  bool unit_weight;
  double operator()(double x, double v) const {
    if (v < 0.0) v = 0.0;
    double lh = unit_weight ? 0.0 : m.weight().log_at(std::exp(x));
    double a = 2.0 * x + m.g_raw(v) + lh;
    return -std::exp(a);
  }
};

struct SourceDD {
  const GrowthModel& m;
  bool unit_weight;
  dd operator()(dd x, dd v) const {
    if (v.hi < 0.0) v = dd(0.0);
    double lh = unit_weight ? 0.0 : m.weight().log_at(std::exp(x.hi));
    dd a = 2.0 * x + m.g_raw(v) + lh;
    return -exp(a);
  }
};

template <class Real, class Src>
void dp5_step(const Src& f, const Dp5Tableau<Real>& t, const State<Real>& s,
              Real h, Real k1v, Real k1w, State<Real>& out, Real& k7v, Real& k7w,
              double& err_v, double& err_w) {
  // k_iv = w at the stage, k_iw = f at the stage
  Real x2 = s.x + t.c2 * h;
  Real v2 = s.v + h * (t.a21 * k1v);
  Real w2 = s.w + h * (t.a21 * k1w);
  Real k2v = w2, k2w = f(x2, v2);

  Real x3 = s.x + t.c3 * h;
  Real v3 = s.v + h * (t.a31 * k1v + t.a32 * k2v);
  Real w3 = s.w + h * (t.a31 * k1w + t.a32 * k2w);
  Real k3v = w3, k3w = f(x3, v3);

  Real x4 = s.x + t.c4 * h;
  Real v4 = s.v + h * (t.a41 * k1v + t.a42 * k2v + t.a43 * k3v);
  Real w4 = s.w + h * (t.a41 * k1w + t.a42 * k2w + t.a43 * k3w);
  Real k4v = w4, k4w = f(x4, v4);

  Real x5 = s.x + t.c5 * h;
  Real v5 = s.v + h * (t.a51 * k1v + t.a52 * k2v + t.a53 * k3v + t.a54 * k4v);
  Real w5 = s.w + h * (t.a51 * k1w + t.a52 * k2w + t.a53 * k3w + t.a54 * k4w);
  Real k5v = w5, k5w = f(x5, v5);

  Real x6 = s.x + h;
  Real v6 = s.v + h * (t.a61 * k1v + t.a62 * k2v + t.a63 * k3v + t.a64 * k4v +
                       t.a65 * k5v);
  Real w6 = s.w + h * (t.a61 * k1w + t.a62 * k2w + t.a63 * k3w + t.a64 * k4w +
                       t.a65 * k5w);
  Real k6v = w6, k6w = f(x6, v6);

  out.x = s.x + h;
  out.v = s.v + h * (t.b1 * k1v + t.b3 * k3v + t.b4 * k4v + t.b5 * k5v +
                     t.b6 * k6v);
  out.w = s.w + h * (t.b1 * k1w + t.b3 * k3w + t.b4 * k4w + t.b5 * k5w +
                     t.b6 * k6w);
  k7v = out.w;
  k7w = f(out.x, out.v);

  Real ev = h * (t.e1 * k1v + t.e3 * k3v + t.e4 * k4v + t.e5 * k5v +
                 t.e6 * k6v + t.e7 * k7v);
  Real ew = h * (t.e1 * k1w + t.e3 * k3w + t.e4 * k4w + t.e5 * k5w +
                 t.e6 * k6w + t.e7 * k7w);
  err_v = std::fabs(to_double(ev));
  err_w = std::fabs(to_double(ew));
}

template <class Real, class Src>
void integrate_core(const Src& src, const GrowthModel& model,
                    const SolverConfig& cfg, double rtol, double atol,
                    double event_tol, State<Real> s, double v_stop,
                    std::vector<Sample>& out, SolverStats& stats,
                    const char* what) {
  const auto tab = Dp5Tableau<Real>::make();
  const bool unit_w = model.weight().is_unit();

  auto push = [&out](const State<Real>& st) {
    double x = to_double(st.x);
    out.push_back(Sample{x, std::exp(x), to_double(st.v), to_double(st.w)});
  };
  push(s);

  Real k1v = s.w, k1w = src(s.x, s.v);
  double h = std::min(cfg.max_dx, 1e-2);
  double err_prev = 1.0;
  const double inv_order = 1.0 / 5.0;

  auto step_cap = [&](const State<Real>& st) {
    // local bump scale: dx ~ (r^2 f'(v))^{-1/2}
    double v = to_double(st.v);
    double x = to_double(st.x);
    double cap = cfg.max_dx;
    if (v > model.formula_domain_min()) {
      double gp = model.g_deriv_raw(v, 1);
      if (gp > 0.0) {
        double lh = unit_w ? 0.0 : model.weight().log_at(std::exp(x));
        double logstat = 2.0 * x + model.g_raw(v) + std::log(gp) + lh;
        if (logstat > -40.0)
          cap = std::min(cap, cfg.curvature_step_frac *
                                  std::exp(-0.5 * std::min(logstat, 700.0)));
      }
    }
    return cap;
  };

  long steps = 0;
  while (true) {
    if (steps >= cfg.max_steps) {
      std::ostringstream os;
      os << what << ": no zero within max_steps (x=" << to_double(s.x)
         << ", v=" << to_double(s.v) << ", w=" << to_double(s.w) << ")";
      throw numeric_error(os.str());
    }
    h = std::min(h, step_cap(s));

    State<Real> nxt;
    Real k7v(0.0), k7w(0.0);
    double ev, ew;
    dp5_step(src, tab, s, Real(h), k1v, k1w, nxt, k7v, k7w, ev, ew);

    bool finite = std::isfinite(to_double(nxt.v)) &&
                  std::isfinite(to_double(nxt.w)) && std::isfinite(ev) &&
                  std::isfinite(ew);
    double scale_v = atol + rtol * std::fabs(to_double(s.v));
    double scale_w = atol + rtol * std::fabs(to_double(s.w));
    double err = finite ? std::max(ev / scale_v, ew / scale_w) : 1e6;

    if (err <= 1.0) {
      ++steps;
      ++stats.steps;
      if (to_double(nxt.v) <= v_stop) {
        // bracketed event refinement: bisect the step length
        double h_lo = 0.0, h_hi = h;
        State<Real> best = nxt;
        Real bv(0.0), bw(0.0);
        for (int it = 0; it < 200; ++it) {
          if (std::fabs(to_double(best.v) - v_stop) <= event_tol) break;
          double hm = 0.5 * (h_lo + h_hi);
          if (hm == h_lo || hm == h_hi) break;
          State<Real> trial;
          double tev, tew;
          dp5_step(src, tab, s, Real(hm), k1v, k1w, trial, bv, bw, tev, tew);
          if (to_double(trial.v) <= v_stop) {
            h_hi = hm;
            best = trial;
          } else {
            h_lo = hm;
          }
        }
        best.v = Real(v_stop);
        push(best);
        return;
      }
      push(nxt);
      s = nxt;
      k1v = k7v;  // FSAL
      k1w = k7w;
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 * inv_order) *
                   std::pow(std::max(err_prev, 1e-10), 0.4 * inv_order);
      h *= std::clamp(fac, 0.2, 6.0);
      err_prev = std::max(err, 1e-10);
    } else {
      ++stats.rejected;
      h *= std::max(0.1, 0.9 * std::pow(err, -inv_order));
      if (h < 1e-14 * std::max(1.0, std::fabs(to_double(s.x)))) {
        std::ostringstream os;
        os << what << ": step size collapsed at x=" << to_double(s.x);
        if (cfg.precision == Precision::fp64 && model.supports_dd())
          os << "; retry with paired-double precision";
        throw numeric_error(os.str());
      }
    }
  }
}

}  // namespace

Shot::Shot(GrowthModel model, double mu, SolverConfig config)
    : model_(std::move(model)), mu_(mu), config_(config) {}

RawTrajectory integrate_raw(const GrowthModel& model, double x0, double v0,
                            double w0, double v_stop,
                            const SolverConfig& config) {
  RawTrajectory out;
  double rtol = config.rtol, atol = config.atol, etol = config.event_tol;
  if (config.precision == Precision::paired) {
    if (!model.supports_dd())
      throw numeric_error("integrate_raw: paired-double needs a built-in family");
    rtol = std::min(rtol, 1e-22);
    atol = std::min(atol, 1e-26);
    etol = std::min(etol, 1e-20);
    SourceDD src{model, model.weight().is_unit()};
    integrate_core(src, model, config, rtol, atol, etol,
                   State<dd>{dd(x0), dd(v0), dd(w0)}, v_stop, out.samples,
                   out.stats, "integrate_raw");
  } else {
    SourceD src{model, model.weight().is_unit()};
    integrate_core(src, model, config, rtol, atol, etol,
                   State<double>{x0, v0, w0}, v_stop, out.samples, out.stats,
                   "integrate_raw");
  }
  return out;
}

Shot integrate(const GrowthModel& model, double mu, const SolverConfig& config) {
  if (!(mu > model.t0()))
    throw domain_error("integrate: requires mu > t0 of the model");
  if (model.formula_domain_min() > 0.0)
    throw domain_error(
        "integrate: the growth law is undefined near v = 0; the trajectory "
        "cannot reach its zero");
  {
    double g_near_zero = model.g_raw(1e-300);
    if (g_near_zero > model.g_raw(mu) + 100.0)
      throw domain_error(
          "integrate: f is singular at v = 0 (negative power); construct the "
          "singular solution via the extension pipeline instead");
  }
  if (!(config.r_init_factor <= 1e-2) || !(config.r_init_factor > 0.0))
    throw domain_error("integrate: r_init_factor must lie in (0, 1e-2]");
  if (!(config.rtol > 0.0) || !(config.atol > 0.0))
    throw domain_error("integrate: tolerances must be positive");
  if (config.precision == Precision::paired && !model.supports_dd())
    throw numeric_error("integrate: paired-double needs a built-in family");

  Shot shot(model, mu, config);
  const GrowthModel& m = shot.model_;

  shot.g_mu_ = m.g_raw(mu);
  shot.log_h0_ = m.weight().is_unit() ? 0.0 : m.weight().log_at(0.0);
  double gp_mu = m.g_deriv_raw(mu, 1);
  if (!(gp_mu > 0.0))
    throw domain_error("integrate: g'(mu) must be positive");
  // r_init = factor * (h(0) f'(mu))^{-1/2}, Taylor seed from the flux law
  double log_fp = shot.g_mu_ + std::log(gp_mu) + shot.log_h0_;
  shot.x_init_ = std::log(config.r_init_factor) - 0.5 * log_fp;
  double seed = std::exp(2.0 * shot.x_init_ + shot.g_mu_ + shot.log_h0_);
  shot.v_init_ = mu - 0.25 * seed;
  shot.w_init_ = -0.5 * seed;

  double rtol = config.rtol, atol = config.atol, etol = config.event_tol;
  if (config.precision == Precision::paired) {
    rtol = std::min(rtol, 1e-22);
    atol = std::min(atol, 1e-26);
    etol = std::min(etol, 1e-20);
  }

  if (config.precision == Precision::fp64) {
    SourceD src{m, m.weight().is_unit()};
    State<double> s{shot.x_init_, shot.v_init_, shot.w_init_};
    integrate_core(src, m, config, rtol, atol, etol, s, 0.0, shot.samples_,
                   shot.stats_, "integrate");
  } else {
    SourceDD src{m, m.weight().is_unit()};
    State<dd> s{dd(shot.x_init_), dd(shot.v_init_), dd(shot.w_init_)};
    integrate_core(src, m, config, rtol, atol, etol, s, 0.0, shot.samples_,
                   shot.stats_, "integrate");
  }

  const Sample& last = shot.samples_.back();
  shot.r0_ = last.r;
  shot.lambda_ = last.r * last.r;
  shot.slope_at_zero_ = last.w / last.r;
  shot.max_flux_residual();
  return shot;
}

std::size_t Shot::bracket(double x) const {
  // index i with samples[i].x <= x <= samples[i+1].x
  std::size_t lo = 0, hi = samples_.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (samples_[mid].x <= x ? lo : hi) = mid;
  }
  return lo;
}

double Shot::v_at_x(double x) const {
  if (x <= x_init_) {
    // Taylor seed v = mu - h(0) f(mu) r^2 / 4
    return mu_ - 0.25 * std::exp(2.0 * x + g_mu_ + log_h0_);
  }
  double xe = samples_.back().x;
  if (x >= xe) {
    if (x > xe + 1e-9) throw domain_error("v_at: beyond the first zero");
    return samples_.back().v;
  }
  std::size_t i = bracket(x);
  const Sample &s0 = samples_[i], &s1 = samples_[i + 1];
  double hint = s1.x - s0.x;
  double t = (x - s0.x) / hint;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * s0.v + h10 * hint * s0.w + h01 * s1.v + h11 * hint * s1.w;
}

double Shot::w_at_x(double x) const {
  if (x <= x_init_) return -0.5 * std::exp(2.0 * x + g_mu_ + log_h0_);
  double xe = samples_.back().x;
  if (x >= xe) {
    if (x > xe + 1e-9) throw domain_error("w_at: beyond the first zero");
    return samples_.back().w;
  }
  std::size_t i = bracket(x);
  const Sample &s0 = samples_[i], &s1 = samples_[i + 1];
  // Hermite cubic on w itself, with the analytic slope dw/dx = -e^{2x+g+logh}
  double hint = s1.x - s0.x;
  double t = (x - s0.x) / hint;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  double wp0 = -std::exp(source_log(s0.x, s0.v));
  double wp1 = -std::exp(source_log(s1.x, s1.v));
  return h00 * s0.w + h10 * hint * wp0 + h01 * s1.w + h11 * hint * wp1;
}

double Shot::v_at(double r) const {
  if (r < 0.0) throw domain_error("v_at: negative radius");
  if (r == 0.0) return mu_;
  return v_at_x(std::log(r));
}

std::function<double(double)> Shot::sampler() const {
  return [this](double r) { return v_at(r); };
}

double Shot::source_log(double x, double v) const {
  double lh = model_.weight().is_unit()
                  ? 0.0
                  : model_.weight().log_at(std::exp(x));
  return 2.0 * x + model_.g_raw(v) + lh;
}

double Shot::source_dlog(double x, double v, double w) const {
  double d = 2.0 + model_.g_deriv_raw(v, 1) * w;
  if (!model_.weight().is_unit()) {
    double r = std::exp(x);
    const auto& c = model_.weight().coef;
    double hp = 0.0;
    for (std::size_t j = c.size(); j-- > 1;)
      hp = hp * r + c[j] * static_cast<double>(j);
    if (r < 1.0) d += r * hp / model_.weight()(r);
  }
  return d;
}

namespace {

// corrected trapezoid: int F dx over one interval given F and F' at the ends
double hermite_panel(double h, double f0, double f1, double d0, double d1) {
  return 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
}

}  // namespace

double Shot::source_integral(double xa, double xb) const {
  if (xb <= xa) return 0.0;
  auto F = [this](double x, double v, double w, double& deriv) {
    double s = std::exp(source_log(x, v));
    deriv = s * source_dlog(x, v, w);
    return s;
  };
  double total = 0.0;
  // endpoints interpolated, interior nodes exact
  std::size_t i = xa <= x_init_ ? 0 : bracket(xa);
  double x0 = xa, v0 = v_at_x(xa), w0 = w_at_x(xa);
  double d0;
  double f0 = F(x0, v0, w0, d0);
  while (true) {
    double x1 = samples_[i + 1].x;
    bool final_panel = x1 >= xb;
    if (final_panel) x1 = xb;
    double v1 = final_panel ? v_at_x(x1) : samples_[i + 1].v;
    double w1 = final_panel ? w_at_x(x1) : samples_[i + 1].w;
    double d1;
    double f1 = F(x1, v1, w1, d1);
    total += hermite_panel(x1 - x0, f0, f1, d0, d1);
    if (final_panel) break;
    x0 = x1; f0 = f1; d0 = d1;
    ++i;
    if (i + 1 >= samples_.size()) break;
  }
  return total;
}

double Shot::source_integral_logweight(double xa, double xb,
                                       double log_sb) const {
  if (xb <= xa) return 0.0;
  auto F = [&](double x, double v, double w, double& deriv) {
    double s = std::exp(source_log(x, v));
    double k = log_sb - x;
    deriv = s * (source_dlog(x, v, w) * k - 1.0);
    return s * k;
  };
  double total = 0.0;
  std::size_t i = xa <= x_init_ ? 0 : bracket(xa);
  double x0 = xa, v0 = v_at_x(xa), w0 = w_at_x(xa);
  double d0;
  double f0 = F(x0, v0, w0, d0);
  while (true) {
    double x1 = samples_[i + 1].x;
    bool final_panel = x1 >= xb;
    if (final_panel) x1 = xb;
    double v1 = final_panel ? v_at_x(x1) : samples_[i + 1].v;
    double w1 = final_panel ? w_at_x(x1) : samples_[i + 1].w;
    double d1;
    double f1 = F(x1, v1, w1, d1);
    total += hermite_panel(x1 - x0, f0, f1, d0, d1);
    if (final_panel) break;
    x0 = x1; f0 = f1; d0 = d1;
    ++i;
    if (i + 1 >= samples_.size()) break;
  }
  return total;
}

double Shot::seed_flux() const {
  return 0.5 * std::exp(2.0 * x_init_ + g_mu_ + log_h0_);
}

double Shot::flux_residual(double x) const {
  double integral = seed_flux() + source_integral(x_init_, x);
  double lhs = -w_at_x(x);
  return std::fabs(lhs - integral) / std::max(std::fabs(lhs), 1e-300);
}

double Shot::max_flux_residual() {
  // checkpoints snapped to accepted-step states, log-uniform in r
  double worst = 0.0;
  int n = std::max(3, config_.checkpoints);
  double xa = x_init_ + 0.05 * (x_end() - x_init_);
  std::size_t prev = samples_.size();
  for (int i = 0; i < n; ++i) {
    double x = xa + (x_end() - xa) * (static_cast<double>(i) / (n - 1));
    std::size_t j = bracket(x) + 1;
    if (j == prev || j + 1 >= samples_.size()) continue;
    prev = j;
    worst = std::max(worst, flux_residual(samples_[j].x));
  }
  worst = std::max(worst, flux_residual(x_end()));
  stats_.max_flux_residual = worst;
  return worst;
}

double Shot::green_identity_residual(double r, double s) const {
  if (!(r > 0.0 && r < s && s <= r0_ * (1.0 + 1e-12)))
    throw domain_error("green_identity_residual: needs 0 < r < s <= r0");
  double xr = std::log(r), xs = std::log(s);
  double lhs = v_at_x(xr) - v_at_x(xs);
  // int_0^r h f(v) t dt, seed tail included
  double inner = seed_flux() + source_integral(x_init_, xr);
  double rhs = (xs - xr) * inner;
  // int_r^s h f(v) t log(s/t) dt with the sub-seed part negligible (r >= r_init)
  double lo = std::max(xr, x_init_);
  if (xr < x_init_) {
    // contribution of the Taylor-seed region [r, r_init]
    double c = std::exp(g_mu_ + log_h0_);
    auto prim = [&](double x) {
      double e = std::exp(2.0 * x);
      return 0.5 * c * e * (xs - x + 0.5);
    };
    rhs += prim(x_init_) - prim(xr);
  }
  rhs += source_integral_logweight(lo, xs, xs);
  return (lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1e-12});
}

double DiscSolution::operator()(double rho) const {
  if (rho < 0.0 || rho > 1.0 + 1e-12)
    throw domain_error("DiscSolution: rho outside [0,1]");
  if (rho >= 1.0) return 0.0;
  return shot->v_at(rho * shot->r0());
}

double DiscSolution::derivative(double rho) const {
  double r = std::max(rho, 1e-300) * shot->r0();
  return shot->w_at_x(std::log(r)) / r * shot->r0();
}

DiscSolution rescale_to_disc(const Shot& shot) { return DiscSolution{&shot}; }

}  // namespace supercrit
