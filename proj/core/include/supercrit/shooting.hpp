#pragma once

// Shooting solver for the radial problem
//     -v'' - v'/r = h(r) f(v),   v(0) = mu,  v'(0) = 0,
// integrated in log-radius x = log r, where the system collapses to
//     dv/dx = w,   dw/dx = -exp(2x + g(v) + log h)
// and the source is only ever formed as that balanced composite.  The first
// zero r0 of v gives lambda = r0^2.

#include <functional>
#include <vector>

#include "supercrit/growth.hpp"

namespace supercrit {

enum class Precision { fp64, paired };

struct SolverConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double r_init_factor = 1e-3;  // start radius as multiple of (f'(mu))^{-1/2}
  long max_steps = 4000000;
  double event_tol = 1e-12;     // absolute, on v at the zero event
  Precision precision = Precision::fp64;
  int checkpoints = 33;         // log-uniform flux-identity checkpoints
  double max_dx = 0.05;         // absolute step cap in log-radius
  double curvature_step_frac = 0.25;  // cap relative to the local bump scale
};

struct Sample {
  double x;        // log r
  double r;
  double v;
  double w;        // dv/dx = r v'
  double v_prime() const { return w / r; }
};

struct SolverStats {
  long steps = 0;
  long rejected = 0;
  double max_flux_residual = 0.0;  // filled by flux_residuals()
};

class Shot {
 public:
  Shot(GrowthModel model, double mu, SolverConfig config);

  const GrowthModel& model() const { return model_; }
  double mu() const { return mu_; }
  const SolverConfig& config() const { return config_; }

  double r0() const { return r0_; }
  double lambda() const { return lambda_; }
  double slope_at_zero() const { return slope_at_zero_; }  // v'(r0)
  const std::vector<Sample>& samples() const { return samples_; }
  const SolverStats& stats() const { return stats_; }
  SolverStats& stats() { return stats_; }

  double x_init() const { return x_init_; }
  double x_end() const { return samples_.back().x; }

  // trajectory evaluation (Taylor seed below r_init, cubic Hermite between
  // stored samples)
  double v_at(double r) const;
  double v_at_x(double x) const;
  double w_at_x(double x) const;
  std::function<double(double)> sampler() const;

  // log of the source term h(r) f(v) r^2 at a trajectory point
  double source_log(double x, double v) const;
  // d/dx of the log source along the trajectory
  double source_dlog(double x, double v, double w) const;

  // integral of h f(v) s ds over [exp(xa), exp(xb)] from the stored samples
  // (corrected trapezoid using the analytic integrand derivative)
  double source_integral(double xa, double xb) const;
  // same with the Green kernel log(s_b/s):  integral of h f(v) s log(sb/s) ds
  double source_integral_logweight(double xa, double xb, double log_sb) const;
  // analytic seed tail int_0^{r_init} h f(mu) s ds
  double seed_flux() const;

  // |(-r v') - int_0^r h f(v) s ds| / |r v'| at radius r
  double flux_residual(double x) const;
  // fills stats().max_flux_residual over `checkpoints` log-uniform radii
  double max_flux_residual();

  // residual of u(r)-u(s) = log(s/r) int_0^r + int_r^s ... (shot coordinates)
  double green_identity_residual(double r, double s) const;

 private:
  friend Shot integrate(const GrowthModel&, double, const SolverConfig&);

  std::size_t bracket(double x) const;

  GrowthModel model_;
  double mu_;
  SolverConfig config_;
  std::vector<Sample> samples_;
  double r0_ = 0.0, lambda_ = 0.0, slope_at_zero_ = 0.0;
  double x_init_ = 0.0, v_init_ = 0.0, w_init_ = 0.0;
  double g_mu_ = 0.0, log_h0_ = 0.0;
  SolverStats stats_;
};

Shot integrate(const GrowthModel& model, double mu,
               const SolverConfig& config = {});

// Bare trajectory of the same radial equation from arbitrary initial data
// (x0 = log r0), stopping at the event v = v_stop.  Shared by the outward
// extension of singular approximants.
struct RawTrajectory {
  std::vector<Sample> samples;
  SolverStats stats;
};

RawTrajectory integrate_raw(const GrowthModel& model, double x0, double v0,
                            double w0, double v_stop,
                            const SolverConfig& config = {});

// u(rho) = v(sqrt(lambda) rho) on [0,1]; u(0) = mu, u(1) = 0.
struct DiscSolution {
  const Shot* shot;
  double operator()(double rho) const;
  double derivative(double rho) const;  // u_r
};

DiscSolution rescale_to_disc(const Shot& shot);

}  // namespace supercrit
