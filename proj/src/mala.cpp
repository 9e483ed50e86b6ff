#include "logz/mala.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "logz/quadrature.hpp"

namespace logz {

std::pair<Vec, Vec> leapfrog(const Oracle& oracle, const Vec& x, const Vec& v, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("leapfrog: eta > 0");
  Vec v_half = v - 0.5 * eta * oracle.grad(x);
  Vec x_new = x + eta * v_half;
  Vec v_new = v_half - 0.5 * eta * oracle.grad(x_new);
  return {std::move(x_new), std::move(v_new)};
}

double hamiltonian(const Oracle& oracle, const Vec& x, const Vec& v) {
  if (x.size() != v.size()) throw std::invalid_argument("hamiltonian: dimension mismatch");
  return oracle.eval(x) + 0.5 * v.squaredNorm();
}

HmcStepResult hmc_step(const Oracle& oracle, const Vec& x, double eta, Rng& rng, bool lazy) {
  if (eta <= 0.0) throw std::invalid_argument("hmc_step: eta > 0");
  HmcStepResult res;
  res.x = x;
  if (lazy && uniform(rng) < 0.5) return res;
  res.proposed = true;
  const Vec v = normal_vec(rng, x.size());
  const auto [x_new, v_new] = leapfrog(oracle, x, v, eta);
  const double h0 = hamiltonian(oracle, x, v);
  const double h1 = hamiltonian(oracle, x_new, v_new);
  if (uniform(rng) <= std::min(1.0, std::exp(h0 - h1))) {
    res.x = x_new;
    res.accepted = true;
  }
  return res;
}

std::vector<Vec> run_mala(const Oracle& oracle, StartLaw start, const Vec& x0_point,
                          const MalaConfig& cfg, Rng& rng) {
  if (cfg.n_steps < 0) throw std::invalid_argument("run_mala: n_steps >= 0");
  Vec x;
  if (start == StartLaw::Point) {
    x = x0_point;
  } else {
    x = oracle.instance().x_star +
        normal_vec(rng, oracle.dim()) / std::sqrt(oracle.instance().L);
  }
  std::vector<Vec> out;
  out.reserve(cfg.n_steps + 1);
  out.push_back(x);
  if (cfg.n_steps == 0) return out;

  int J = cfg.wrapper_J;
  if (cfg.mixing_wrapper && J <= 0)
    J = default_wrapper_J(oracle.instance().kappa(), oracle.dim(), cfg.wrapper_eps);

  for (int k = 0; k < cfg.n_steps; ++k) {
    if (cfg.mixing_wrapper) {
      std::uniform_int_distribution<int> pick(0, J);
      const int j = pick(rng);
      for (int t = 0; t < j; ++t) x = hmc_step(oracle, x, cfg.eta, rng, cfg.lazy).x;
    } else {
      x = hmc_step(oracle, x, cfg.eta, rng, cfg.lazy).x;
    }
    out.push_back(x);
  }
  return out;
}

int default_wrapper_J(double kappa, int d, double eps) {
  const double l1 = std::log(kappa / eps);
  if (l1 <= 0.0) return 1;
  const double l2 = std::log(d * l1);
  if (l2 <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(kappa * d * l1 * l2)));
}

double wsc21_leapfrog_step(double L, int d, double kappa, double beta, double eps, double c0) {
  const double arg = std::max({kappa, static_cast<double>(d), beta / eps, std::exp(1.0)});
  const double lg = std::log(arg);
  const double h = c0 / (L * d * lg * lg);
  return std::sqrt(2.0 * h);
}

double warmness(const Vec& rho0_weights, const Vec& rho_weights) {
  if (rho0_weights.size() != rho_weights.size())
    throw std::invalid_argument("warmness: grids mismatch");
  double beta = 0.0;
  for (Eigen::Index i = 0; i < rho0_weights.size(); ++i) {
    if (rho_weights[i] <= 0.0) {
      if (rho0_weights[i] > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    beta = std::max(beta, rho0_weights[i] / rho_weights[i]);
  }
  return beta;
}

double histogram_l1_distance(const std::vector<double>& samples,
                             const std::function<double(double)>& density, double lo, double hi,
                             int bins) {
  if (samples.empty() || bins < 1 || hi <= lo)
    throw std::invalid_argument("histogram_l1_distance: bad arguments");
  std::vector<double> counts(bins, 0.0);
  double outside = 0.0;
  const double w = (hi - lo) / bins;
  for (double s : samples) {
    if (s < lo || s >= hi) {
      outside += 1.0;
      continue;
    }
    counts[static_cast<int>((s - lo) / w)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  double true_inside = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double p = integrate_1d(density, lo + b * w, lo + (b + 1) * w, 2);
    true_inside += p;
    dist += std::fabs(counts[b] / n - p);
  }
  dist += std::fabs(outside / n - (1.0 - true_inside));
  return dist;
}

}  // namespace logz
