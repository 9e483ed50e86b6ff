#pragma once

#include <vector>

#include "logz/brownian.hpp"
#include "logz/oracle.hpp"
#include "logz/rng.hpp"

namespace logz {

// Position-velocity pair of the underdamped dynamics (gamma = 2, u = 1/L);
// stationary law is proportional to e^{-(f(x) + L |v|^2 / 2)}.
struct PhaseState {
  Vec x, v;
};

enum class Scheme { ULD, ULD_RMM };

struct GradMode {
  bool noisy = false;
  NoiseConfig cfg;

  static GradMode exact() { return {}; }
  static GradMode with_noise(const NoiseConfig& cfg) { return {true, cfg}; }
};

// One integrator step with the gradient and joint Gaussian increments passed
// in; pure in its arguments (pass zero increments to probe the drift alone).
PhaseState uld_apply(double L, const Vec& grad_x, const PhaseState& s, double h, const Vec& w1,
                     const Vec& w2);

struct RmmGrads {
  Vec at_x;  // gradient at the step start (drives the midpoint)
  Vec at_y;  // gradient at the midpoint (drives the main update)
};
PhaseState uld_rmm_apply(double L, const RmmGrads& g, const PhaseState& s, double h, double alpha,
                         const Vec& w1, const Vec& w2, const Vec& w3, Vec* midpoint = nullptr);
Vec uld_rmm_midpoint(double L, const Vec& grad_x, const PhaseState& s, double h, double alpha,
                     const Vec& w3);

// One step with increments drawn from the exact joint covariance. Noisy
// gradients draw from a stream derived once per chain so the Brownian draws
// are unchanged between exact and noisy runs with the same seed.
PhaseState uld_step(const Oracle& oracle, const PhaseState& s, double h, Rng& rng,
                    const GradMode& mode = {}, Rng* noise_rng = nullptr);
PhaseState uld_rmm_step(const Oracle& oracle, const PhaseState& s, double h, Rng& rng,
                        const GradMode& mode = {}, Rng* noise_rng = nullptr);

struct Trajectory {
  double h = 0.0;
  std::vector<PhaseState> states;  // floor(T/h) + 1 entries, initial state first
};

// v0 = 0. Ledger: exactly 1 gradient call per ULD step, 2 per ULD-RMM step.
Trajectory run_chain(const Oracle& oracle, const Vec& x0, double h, double T, Rng& rng,
                     Scheme scheme, const GradMode& mode = {});

// Bures-Wasserstein distance between the empirical Gaussian fit of the
// samples (mean + diagonal covariance) and the diagonal reference; exact when
// both laws are Gaussian, an approximation otherwise. Needs >= 100 samples.
double w2_gaussian(const std::vector<Vec>& samples, const Vec& mean, const Vec& cov_diag);

// Common-random-number h-sweep against the same scheme at h_min / ref_refine
// on a shared Brownian path. Reports sqrt(E |x_h(T) - x_ref(T)|^2) per h and
// its log-log slope (strong order: 1 for ULD, 1.5 for ULD-RMM).
struct OrderSweep {
  std::vector<double> hs;
  std::vector<double> rms_errors;
  double slope = 0.0;
};
OrderSweep strong_order_sweep(const Oracle& oracle, Scheme scheme, const Vec& x0, double T,
                              const std::vector<double>& hs, int ref_refine, int replicas,
                              std::uint64_t seed, int threads = 1);

// Convergence budget of the ULD mixing bound: step h = eps / (104 kappa) /
// sqrt(d/mu + D^2) and horizon T = (kappa/2) log(24 sqrt(d/mu + D^2) / eps),
// D the start distance from the minimizer.
struct UldBudget {
  double h = 0.0;
  double T = 0.0;
  long long steps = 0;
};
UldBudget uld_budget_for_eps(const FunctionInstance& inst, double eps, double start_distance = 0.0);

}  // namespace logz
