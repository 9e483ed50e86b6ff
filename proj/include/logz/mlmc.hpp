#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logz/langevin.hpp"
#include "logz/oracle.hpp"

namespace logz {

using Payoff = std::function<double(const Vec&)>;

struct LevelStats {
  int level = 0;
  long long n_steps = 0;  // fine-grid steps n0 * 2^level
  double mean_diff = 0.0;
  double var_diff = 0.0;
  double cost = 0.0;  // oracle calls per sample
  long long n_samples = 0;
};

struct CoupledSample {
  double diff = 0.0;
  bool ok = true;
};

// P_l - P_{l-1} on one shared Brownian path (P_{-1} = 0): both levels
// integrate the same path, the coarse increments assembled exactly from the
// fine ones. Non-finite trajectories are flagged, not returned.
CoupledSample coupled_level_sample(const Oracle& oracle, const Payoff& payoff, const Vec& x0,
                                   int level, double T, int n0, Scheme scheme, Rng& rng);

struct RateFit {
  double alpha = 0.0;  // decay of |mean_diff| ~ 2^{-alpha l}
  double beta = 0.0;   // decay of var_diff ~ 2^{-beta l}
  double gamma = 0.0;  // growth of cost ~ 2^{gamma l}
};

// Log2-log2 least-squares slopes over the given levels; needs >= 4.
RateFit fit_rates(const std::vector<LevelStats>& stats);

struct MlmcOptions {
  int n0 = 1;
  int pilot = 100;
  int start_levels = 5;  // levels 0..start_levels-1 piloted up front
  int max_level = 14;
  int threads = 1;
};

struct MlmcResult {
  double estimate = 0.0;
  std::vector<LevelStats> levels;
  RateFit rates;
  double total_cost = 0.0;  // oracle calls consumed
  bool ok = false;
  std::string diagnostic;
};

// Standard MLMC driver with MSE split eps^2/2 + eps^2/2: the max level is
// grown until the fitted-alpha bias estimate |mean_L| / (2^alpha - 1) drops
// below eps/2, and N_l ~ sqrt(V_l / C_l) balances the variance budget.
// Non-monotone (non-decaying) level variances abort with a diagnostic.
MlmcResult mlmc_estimate(const Oracle& oracle, const Payoff& payoff, const Vec& x0, double T,
                         double eps, Scheme scheme, const MlmcOptions& opt, Rng& rng);

}  // namespace logz
