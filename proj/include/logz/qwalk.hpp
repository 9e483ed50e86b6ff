#pragma once

#include <vector>

#include <Eigen/Dense>

#include "logz/anneal.hpp"
#include "logz/oracle.hpp"

namespace logz {

// Reversible chain on a finite grid (d <= 2). P is row-stochastic, pi is its
// stationary law (the grid restriction of e^{-f}, normalized).
struct DiscreteChain {
  Eigen::MatrixXd points;  // N x d
  Eigen::MatrixXd P;       // N x N
  Vec pi;

  int size() const { return static_cast<int>(P.rows()); }
  static DiscreteChain from_matrix(Eigen::MatrixXd P, Vec pi,
                                   Eigen::MatrixXd points = Eigen::MatrixXd());
};

struct GridCfg {
  int n_per_axis = 64;
  double half_width_sigmas = 6.0;  // grid covers x* +- this many target sd
};

enum class KernelKind { MhGaussian, HmcOneStep };

// Builds the Metropolis chain on the grid. MhGaussian: random-walk proposal
// N(x, eta^2 I) restricted to grid points (self allowed), full MH filter.
// HmcOneStep (d = 1): one-leapfrog HMC; the proposal density of x~ given x is
// N(x - (eta^2/2) f'(x), eta^2) and the acceptance uses the Hamiltonian
// difference, which equals the MH ratio exactly, so detailed balance is exact.
// Rejected mass sits on the diagonal. Throws when the grid is too coarse (a
// row's off-diagonal mass below 1e-6).
DiscreteChain discretize_chain(const FunctionInstance& inst, const GridCfg& cfg, KernelKind kind,
                               double eta);

// Chain sanity residuals.
double row_sum_residual(const DiscreteChain& chain);
double detailed_balance_residual(const DiscreteChain& chain);
double stationarity_residual(const DiscreteChain& chain);

// D_xy = sqrt(P_xy P_yx); cospectral with P for reversible chains.
Eigen::MatrixXd discriminant(const DiscreteChain& chain);

// Eigenvalues of D paired with eigenphases of the walk operator
// W = S (2 Pi - I). For N <= 64 the phases come from a dense N^2 x N^2
// eigendecomposition; above that from the invariant-subspace characterization
// (each |lambda| < 1 contributes the pair +-arccos(lambda)).
struct WalkSpectrum {
  Vec disc_eigs;               // descending
  std::vector<double> phases;  // in (-pi, pi], stationary phase 0
  double delta = 0.0;          // 1 - lambda_2
  double phase_gap = 0.0;      // min nonzero |phase|; pi when no nonzero phase exists
  bool dense = false;
};
WalkSpectrum walk_spectrum(const DiscreteChain& chain);

Eigen::MatrixXd walk_operator_dense(const DiscreteChain& chain);

// Hausdorff-type mismatch between the dense walk eigenvalues and the
// theoretical set {+-1} U {e^{+- i arccos lambda} : lambda in eig(D)}.
double walk_spectral_identity_residual(const DiscreteChain& chain);

// Bhattacharyya overlap sum_x sqrt(pi_i pi_{i+1}) of consecutive annealing
// stage distributions on a shared grid; stage indices 0..M (stage 0 is the
// bare Gaussian, stage M+1 the target).
double qsample_overlap(const FunctionInstance& inst, const Schedule& sched, int stage_i,
                       int grid_n = 2048, double half_width_sigmas = 8.0);

// Overlaps of the lifted start state phi_rho0 (coordinates sqrt(rho0(x) P_xy))
// with the walk eigenvectors of the nonreal pairs: |<phi|u_lambda^+->| =
// |<lambda|sqrt(rho0)>| / sqrt(2), reported per eigenvalue lambda < 1.
struct GapProfileEntry {
  double lambda = 0.0;
  double overlap = 0.0;
};
std::vector<GapProfileEntry> effective_gap_profile(const DiscreteChain& chain, const Vec& rho0);

// Steps until TV(rho0 P^t, pi) <= eps (TV in the standard halved convention,
// matching t_mix(eps) >= (1/delta - 1) log(1/(2 eps))); -1 if not reached.
int t_mix_from(const DiscreteChain& chain, const Vec& rho0, double eps, int max_t = 1000000);
int t_mix_worst(const DiscreteChain& chain, double eps, int max_t = 1000000);

// Warm-start effective-gap envelope: max overlap among eigenvalues within
// c_win / t_mix(eps) of 1 must stay below c_bound * beta * sqrt(eps).
struct EffectiveGapCheck {
  double eps = 0.0;
  int t_mix = 0;
  double max_eligible_overlap = 0.0;
  double envelope = 0.0;
  int eligible_modes = 0;
  bool ok = false;
};
EffectiveGapCheck effective_gap_envelope(const DiscreteChain& chain, const Vec& rho0, double eps,
                                         double beta, double c_win = 3.0, double c_bound = 4.0);

}  // namespace logz
