#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "logz/ledger.hpp"
#include "logz/rng.hpp"

namespace logz {

using json = nlohmann::json;

// A smooth strongly convex target f with evaluation/gradient access and
// certified (mu, L). `spec` is the construction record and drives
// serialization; instances are immutable after construction and safe to share
// across threads.
struct FunctionInstance {
  int d = 0;
  double L = 1.0;
  double mu = 1.0;
  Vec x_star;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::string tag;
  json spec;

  double kappa() const { return L / mu; }
};

double evaluate(const FunctionInstance& inst, const Vec& x);
Vec gradient(const FunctionInstance& inst, const Vec& x);

// Oracle view used by samplers: every call is counted so ledger totals stay
// exact (ULD: 1 gradient/step, ULD-RMM: 2, HMC proposal: 2 gradient + 2
// evaluation).
struct Oracle {
  const FunctionInstance* inst = nullptr;
  QueryLedger* ledger = nullptr;

  Oracle() = default;
  Oracle(const FunctionInstance& instance, QueryLedger* led = nullptr)
      : inst(&instance), ledger(led) {}

  const FunctionInstance& instance() const { return *inst; }
  int dim() const { return inst->d; }

  double eval(const Vec& x) const {
    if (ledger) ledger->add_eval();
    return evaluate(*inst, x);
  }
  Vec grad(const Vec& x) const {
    if (ledger) ledger->add_grad();
    return gradient(*inst, x);
  }
};

// Stochastic gradient contract emulating the quantum evaluation-oracle
// gradient: per-coordinate clipping at clip_level, independent
// truncated-Gaussian noise with total variance <= sigma_sq, and a
// deterministic bias vector of l1 norm bias_bound = 3000 d^{1.5}
// sqrt(eps_eval L).
struct NoiseConfig {
  double eps_eval = 0.0;
  double bias_bound = 0.0;
  double clip_level = std::numeric_limits<double>::infinity();
  double sigma_sq = 0.0;
  bool bias_enabled = true;

  static NoiseConfig make(const FunctionInstance& inst, double eps_eval, double sigma_sq,
                          double clip_level = std::numeric_limits<double>::infinity());
  bool zero_noise() const;
};

Vec noisy_gradient(const FunctionInstance& inst, const Vec& x, const NoiseConfig& cfg, Rng& rng);

// Min/max of the strong-convexity quotient
//   (f(y) - f(x) - <grad f(x), y - x>) / (|y - x|^2 / 2)
// over random pairs of lattice points in the box [lo, hi]^d.
struct ConditioningEstimate {
  double mu_hat = 0.0;
  double L_hat = 0.0;
};
ConditioningEstimate verify_conditioning(const FunctionInstance& inst, const Vec& lo,
                                         const Vec& hi, int grid_points, int pairs = 10000,
                                         std::uint64_t seed = 12345,
                                         QueryLedger* ledger = nullptr);

// Shipped instances.
FunctionInstance make_gaussian(int d);                       // f = |x|^2 / 2
FunctionInstance make_diag_quadratic(const Vec& coeffs);     // f = 1/2 sum c_i x_i^2
FunctionInstance make_diag_quadratic(const Vec& coeffs, double mu_declared, double L_declared);
FunctionInstance make_diag_quadratic(int d, double kappa);   // coeffs spread over [1, kappa]
FunctionInstance make_logistic(int d, double mu_reg = 0.5, double weight = 1.0);

// f + |x|^2 / (2 sigma^2); minimizer recomputed by gradient descent.
FunctionInstance tilted_instance(const FunctionInstance& base, double sigma_sq);

json instance_to_json(const FunctionInstance& inst);
FunctionInstance instance_from_json(const json& j);

}  // namespace logz
