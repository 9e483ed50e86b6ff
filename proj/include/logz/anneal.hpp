#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logz/oracle.hpp"
#include "logz/rng.hpp"

namespace logz {

// Annealing variance schedule: sigma_1^2 = eps/(2dL), per-stage ratio
// 1 + 1/sqrt(d), stopping at the first sigma^2 >= 2 sqrt(d)/mu. Stage i
// targets rho_i ~ e^{-f_i}, f_i = f + |x|^2/(2 sigma_i^2); sigma_{M+1} is
// infinite by convention.
struct Schedule {
  std::vector<double> sigma_sq;  // ascending, sigma_1^2 .. sigma_M^2
  int M = 0;
  double eps = 0.0;
  int d = 0;
  double L = 0.0;
  double mu = 0.0;

  double alpha() const { return 1.0 / std::sqrt(static_cast<double>(d)); }
};

Schedule build_schedule(int d, double L, double mu, double eps);

// g_i(x) = exp( (sigma_i^{-2} - sigma_{i+1}^{-2}) |x|^2 / 2 ), stage index i
// in [0, M); the last stage uses sigma_{M+1}^{-2} = 0.
double g_ratio(const Schedule& sched, int i, const Vec& x);

// Truncation radius r_i^+ = E_{rho_{i+1}} |x| + sigma_i sqrt((1+alpha)
// log(1/eps)) (Theta-constant 1) and the truncated payoff
// h_i = min{ g_i, exp((r_i^+)^2 / (sigma_i^2 (1 + alpha^{-1}))) }.
double stage_r_plus(const Schedule& sched, int i, double mean_norm_next, double eps);
double truncation_cap(const Schedule& sched, int i, double r_plus);
double truncated_g(const Schedule& sched, int i, const Vec& x, double r_plus);

// Empirical E[g^2] / E[g]^2; throws on fewer than 2 or all-identical samples
// unless the payoff is constant (ratio 1).
double relative_variance(const std::vector<double>& g_values);

// Negative log density of stage i on the recentered instance; i in [0, M+1]
// (0 is the bare Gaussian with variance sigma_1^2, M+1 the target).
double stage_neg_log_density(const FunctionInstance& recentered, const Schedule& sched, int i,
                             const Vec& x);

// f shifted so the minimizer sits at the origin with value 0; Z picks up the
// factor e^{-f(x_star)}.
FunctionInstance recentered_instance(const FunctionInstance& inst);

// Exact i.i.d. draw from e^{-f~(x) - inv_sigma_sq |x|^2 / 2} on a recentered
// instance: Gaussian envelope with precision mu~ + inv_sigma_sq, acceptance
// exp(-(f~(x) - mu~ |x|^2 / 2)). Every target evaluation is counted.
Vec rejection_sample(const FunctionInstance& recentered, double inv_sigma_sq, Rng& rng,
                     QueryLedger* ledger = nullptr);

enum class SamplerKind { ULD, ULD_RMM, MALA, ExactRejection };
SamplerKind sampler_from_string(const std::string& name);
const char* sampler_name(SamplerKind kind);

struct StageDiag {
  int stage = 0;  // 1-based in reports
  double sigma_sq = 0.0;
  double mean_g = 0.0;
  double rel_var = 0.0;
  std::uint64_t grad_calls = 0;
  std::uint64_t eval_calls = 0;
};

struct ZEstimate {
  double z_hat = 0.0;
  std::vector<StageDiag> stages;
  bool diverged = false;
  int diverged_stage = -1;
};

struct EstimateZConfig {
  SamplerKind sampler = SamplerKind::MALA;
  int K = 512;          // chains per stage (>= 30)
  int burn_steps = 80;  // sampler steps per stage per chain
  double step_scale = 1.0;
  int threads = 1;
  bool payoff_one = false;  // test hook: pins every telescoping factor to 1
};

// Telescoping-product estimator: Z_hat = (2 pi sigma_1^2)^{d/2} *
// prod_i mean_K(g_i(X_i^{(k)})) * e^{-f(x_star)}, warm-starting each stage
// from the previous stage's final points. Aborts with the stage index when a
// chain leaves the finite range.
ZEstimate estimate_Z(const FunctionInstance& inst, const Schedule& sched,
                     const EstimateZConfig& cfg, Rng& rng, QueryLedger* ledger = nullptr);

// Annealing + per-stage multilevel Monte Carlo over the coupled underdamped
// discretization; per-stage relative tolerance eps/(2M) with truncated
// payoffs.
struct ZMlmcConfig {
  int scheme_rmm = 0;  // 0: ULD, 1: ULD-RMM
  int n0 = 4;          // steps at level 0
  int threads = 1;
  double t_factor = 1.0;
};
ZEstimate estimate_Z_mlmc(const FunctionInstance& inst, const Schedule& sched, double eps_total,
                          const ZMlmcConfig& cfg, Rng& rng, QueryLedger* ledger = nullptr);

}  // namespace logz
