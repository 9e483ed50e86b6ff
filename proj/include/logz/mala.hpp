#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "logz/oracle.hpp"
#include "logz/rng.hpp"

namespace logz {

// One leapfrog with step eta; exactly 2 gradient calls. Volume-preserving and
// time-reversible: leapfrog(x~, -v~) returns (x, -v).
std::pair<Vec, Vec> leapfrog(const Oracle& oracle, const Vec& x, const Vec& v, double eta);

// H(x, v) = f(x) + |v|^2 / 2 (one evaluation call).
double hamiltonian(const Oracle& oracle, const Vec& x, const Vec& v);

struct HmcStepResult {
  Vec x;
  bool proposed = false;  // false when the lazy coin held the chain in place
  bool accepted = false;
};

// Metropolized HMC step: full velocity refresh, one leapfrog proposal,
// acceptance min{1, exp(H(x,v) - H(x~,v~))}. A proposal costs exactly
// 2 gradient + 2 evaluation calls; a lazy hold costs nothing.
HmcStepResult hmc_step(const Oracle& oracle, const Vec& x, double eta, Rng& rng,
                       bool lazy = false);

enum class StartLaw { Point, GaussianLinv };

struct MalaConfig {
  double eta = 0.1;
  int n_steps = 1000;
  bool lazy = false;
  bool mixing_wrapper = false;
  int wrapper_J = 0;          // <= 0 picks default_wrapper_J(kappa, d, wrapper_eps)
  double wrapper_eps = 0.05;
};

// Plain chain: positions after each step, initial point first (n_steps + 1
// entries). Mixing wrapper: each output advances the chain by j ~ U{0..J}
// HMC steps.
std::vector<Vec> run_mala(const Oracle& oracle, StartLaw start, const Vec& x0_point,
                          const MalaConfig& cfg, Rng& rng);

// ceil(kappa d log(kappa/eps) log(d log(kappa/eps))) with every hidden
// constant set to 1, clamped to >= 1.
int default_wrapper_J(double kappa, int d, double eps);

// Step size from the warm-start mixing bound: h = c0 / (L d log^2(max{kappa,
// d, beta/eps, e})). Returned as the leapfrog step eta = sqrt(2h), since a
// one-leapfrog proposal x - (eta^2/2) grad f + eta v matches a MALA proposal
// of step h = eta^2 / 2.
double wsc21_leapfrog_step(double L, int d, double kappa, double beta, double eps,
                           double c0 = 0.5);

// max_i rho0[i] / rho[i] over grid atoms; +infinity when rho vanishes where
// rho0 does not.
double warmness(const Vec& rho0_weights, const Vec& rho_weights);

// Unnormalized L1 histogram distance between the sample law and `density`
// (the paper's TV integral, without the 1/2): fixed-width bins on [lo, hi]
// plus the out-of-range mass.
double histogram_l1_distance(const std::vector<double>& samples,
                             const std::function<double(double)>& density, double lo, double hi,
                             int bins);

}  // namespace logz
