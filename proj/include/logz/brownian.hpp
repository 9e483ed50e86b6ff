#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "logz/rng.hpp"

namespace logz {

// Gaussian functionals of one Brownian path, of the form
//   int phi(s) dB_s,  phi(s) = c0 + c1 e^{2(s - t0)} on [a, b],
// the building blocks of the underdamped integrator increments (friction
// gamma = 2 throughout, so only the rate-2 exponential appears). Covariances
// come from the Ito isometry: Cov = int phi psi ds over the overlap.
struct ExpSegment {
  double a = 0.0, b = 0.0;
  double c0 = 0.0, c1 = 0.0;
  double t0 = 0.0;
};

struct PathFunctional {
  std::vector<ExpSegment> segs;

  // W1 = int_{t0}^{t1} e^{2(s - t1)} dB
  static PathFunctional w1(double t0, double t1);
  // W2 = int_{t0}^{t1} (1 - e^{2(s - t1)}) dB
  static PathFunctional w2(double t0, double t1);
  // W3 = int_{t0}^{t0 + alpha (t1 - t0)} (1 - e^{2(s - t1)}) dB
  static PathFunctional w3(double t0, double t1, double alpha);
  // int_a^c dB
  static PathFunctional plain(double a, double c);
  // int_a^c e^{2(s - bref)} dB
  static PathFunctional partial_exp(double a, double c, double bref);
};

double functional_inner(const PathFunctional& f, const PathFunctional& g);
Eigen::MatrixXd functional_covariance(const std::vector<PathFunctional>& fs);

// Lower-triangular factor; escalating diagonal jitter up to 1e-14, then throws.
Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd cov);

// Joint per-dimension covariance of the increments entering one integrator
// step: (W1, W2) for ULD, (W1, W2, W3) for ULD-RMM at midpoint fraction alpha.
struct IncrementCovariance {
  double h = 0.0;
  std::optional<double> alpha;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
};

IncrementCovariance uld_covariance(double h);
IncrementCovariance uld_rmm_covariance(double h, double alpha);

// Draws one joint increment vector per dimension: row k of the result holds
// the d-dimensional k-th functional.
Eigen::MatrixXd draw_increments(const IncrementCovariance& ic, int dim, Rng& rng);

// Per-level per-step increments of one shared Brownian path over [0, T],
// sampled jointly across a tower of nested step grids. Every level's
// functionals are assembled exactly from joint draws local to the finest
// steps, so coarse and fine chains integrate the same path.
struct LevelSpec {
  int n_steps = 1;
  bool rmm = false;
};

struct LevelIncrements {
  double h = 0.0;
  std::vector<Vec> w1, w2, w3;  // w3 used only when rmm
  std::vector<double> alpha;    // per-step midpoint draws (rmm only)
};

std::vector<LevelIncrements> sample_coupled_increments(double T,
                                                       const std::vector<LevelSpec>& levels,
                                                       int dim, Rng& rng);

}  // namespace logz
