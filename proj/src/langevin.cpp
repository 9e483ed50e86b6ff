#include "logz/langevin.hpp"

#include <cmath>
#include <stdexcept>

#include "logz/stats.hpp"

namespace logz {

namespace {

Vec chain_gradient(const Oracle& oracle, const Vec& x, const GradMode& mode, Rng* noise_rng) {
  if (!mode.noisy) return oracle.grad(x);
  if (oracle.ledger) oracle.ledger->add_grad();
  return noisy_gradient(oracle.instance(), x, mode.cfg, *noise_rng);
}

}  // namespace

PhaseState uld_apply(double L, const Vec& grad_x, const PhaseState& s, double h, const Vec& w1,
                     const Vec& w2) {
  const double ea = std::exp(-2.0 * h);
  const double su = 1.0 / std::sqrt(L);
  PhaseState out;
  out.v = ea * s.v - (1.0 / (2.0 * L)) * (1.0 - ea) * grad_x + 2.0 * su * w1;
  out.x = s.x + 0.5 * (1.0 - ea) * s.v - (1.0 / (2.0 * L)) * (h - 0.5 * (1.0 - ea)) * grad_x +
          su * w2;
  return out;
}

Vec uld_rmm_midpoint(double L, const Vec& grad_x, const PhaseState& s, double h, double alpha,
                     const Vec& w3) {
  const double ea = std::exp(-2.0 * alpha * h);
  return s.x + 0.5 * (1.0 - ea) * s.v -
         (1.0 / (2.0 * L)) * (alpha * h - 0.5 * (1.0 - ea)) * grad_x +
         (1.0 / std::sqrt(L)) * w3;
}

PhaseState uld_rmm_apply(double L, const RmmGrads& g, const PhaseState& s, double h, double alpha,
                         const Vec& w1, const Vec& w2, const Vec& w3, Vec* midpoint) {
  if (midpoint) *midpoint = uld_rmm_midpoint(L, g.at_x, s, h, alpha, w3);
  const double ea = std::exp(-2.0 * h);
  const double w = std::exp(-2.0 * (1.0 - alpha) * h);
  const double su = 1.0 / std::sqrt(L);
  PhaseState out;
  out.v = ea * s.v - (h / L) * w * g.at_y + 2.0 * su * w1;
  out.x = s.x + 0.5 * (1.0 - ea) * s.v - (h / (2.0 * L)) * (1.0 - w) * g.at_y + su * w2;
  return out;
}

PhaseState uld_step(const Oracle& oracle, const PhaseState& s, double h, Rng& rng,
                    const GradMode& mode, Rng* noise_rng) {
  if (h <= 0.0) throw std::invalid_argument("uld_step: h > 0");
  Rng local_noise = make_rng(rng());
  const IncrementCovariance ic = uld_covariance(h);
  const Eigen::MatrixXd w = draw_increments(ic, oracle.dim(), rng);
  const Vec g = chain_gradient(oracle, s.x, mode, noise_rng ? noise_rng : &local_noise);
  return uld_apply(oracle.instance().L, g, s, h, w.row(0), w.row(1));
}

PhaseState uld_rmm_step(const Oracle& oracle, const PhaseState& s, double h, Rng& rng,
                        const GradMode& mode, Rng* noise_rng) {
  if (h <= 0.0) throw std::invalid_argument("uld_rmm_step: h > 0");
  Rng local_noise = make_rng(rng());
  const double alpha = uniform(rng);
  const IncrementCovariance ic = uld_rmm_covariance(h, alpha);
  const Eigen::MatrixXd w = draw_increments(ic, oracle.dim(), rng);
  Rng* nrng = noise_rng ? noise_rng : &local_noise;
  RmmGrads g;
  g.at_x = chain_gradient(oracle, s.x, mode, nrng);
  const Vec y = uld_rmm_midpoint(oracle.instance().L, g.at_x, s, h, alpha, w.row(2));
  g.at_y = chain_gradient(oracle, y, mode, nrng);
  return uld_rmm_apply(oracle.instance().L, g, s, h, alpha, w.row(0), w.row(1), w.row(2));
}

Trajectory run_chain(const Oracle& oracle, const Vec& x0, double h, double T, Rng& rng,
                     Scheme scheme, const GradMode& mode) {
  if (h <= 0.0 || T < h) throw std::invalid_argument("run_chain: need T >= h > 0");
  const int n = static_cast<int>(std::floor(T / h + 1e-12));
  // One noise stream per chain keeps the Brownian draw sequence identical
  // between exact and noisy runs started from the same rng state.
  Rng noise_rng = make_rng(rng());

  Trajectory traj;
  traj.h = h;
  traj.states.reserve(n + 1);
  PhaseState s{x0, Vec::Zero(x0.size())};
  traj.states.push_back(s);

  if (scheme == Scheme::ULD) {
    const IncrementCovariance ic = uld_covariance(h);
    for (int k = 0; k < n; ++k) {
      const Eigen::MatrixXd w = draw_increments(ic, oracle.dim(), rng);
      const Vec g = chain_gradient(oracle, s.x, mode, &noise_rng);
      s = uld_apply(oracle.instance().L, g, s, h, w.row(0), w.row(1));
      traj.states.push_back(s);
    }
  } else {
    for (int k = 0; k < n; ++k) {
      const double alpha = uniform(rng);
      const IncrementCovariance ic = uld_rmm_covariance(h, alpha);
      const Eigen::MatrixXd w = draw_increments(ic, oracle.dim(), rng);
      RmmGrads g;
      g.at_x = chain_gradient(oracle, s.x, mode, &noise_rng);
      const Vec y = uld_rmm_midpoint(oracle.instance().L, g.at_x, s, h, alpha, w.row(2));
      g.at_y = chain_gradient(oracle, y, mode, &noise_rng);
      s = uld_rmm_apply(oracle.instance().L, g, s, h, alpha, w.row(0), w.row(1), w.row(2));
      traj.states.push_back(s);
    }
  }
  return traj;
}

double w2_gaussian(const std::vector<Vec>& samples, const Vec& mean, const Vec& cov_diag) {
  if (samples.size() < 100) throw std::invalid_argument("w2_gaussian: need >= 100 samples");
  const Eigen::Index d = mean.size();
  Vec m = Vec::Zero(d);
  for (const Vec& s : samples) m += s;
  m /= static_cast<double>(samples.size());
  Vec var = Vec::Zero(d);
  for (const Vec& s : samples) var += (s - m).array().square().matrix();
  var /= static_cast<double>(samples.size() - 1);
  double w2sq = (m - mean).squaredNorm();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diff = std::sqrt(var[i]) - std::sqrt(cov_diag[i]);
    w2sq += diff * diff;
  }
  return std::sqrt(w2sq);
}

OrderSweep strong_order_sweep(const Oracle& oracle, Scheme scheme, const Vec& x0, double T,
                              const std::vector<double>& hs, int ref_refine, int replicas,
                              std::uint64_t seed, int threads) {
  if (hs.size() < 2) throw std::invalid_argument("strong_order_sweep: need >= 2 step sizes");
  std::vector<LevelSpec> levels;
  const bool rmm = scheme == Scheme::ULD_RMM;
  int n_max = 0;
  for (double h : hs) {
    const double n_real = T / h;
    const int n = static_cast<int>(std::llround(n_real));
    if (std::fabs(n_real - n) > 1e-9) throw std::invalid_argument("strong_order_sweep: T/h integral");
    levels.push_back({n, rmm});
    n_max = std::max(n_max, n);
  }
  levels.push_back({n_max * ref_refine, rmm});  // shared-path reference

  const double L = oracle.instance().L;
  std::vector<std::vector<double>> sq_err(hs.size(), std::vector<double>(replicas, 0.0));

  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    const auto incs = sample_coupled_increments(T, levels, static_cast<int>(x0.size()), rng);
    auto run_level = [&](const LevelIncrements& li) {
      PhaseState s{x0, Vec::Zero(x0.size())};
      for (std::size_t k = 0; k < li.w1.size(); ++k) {
        if (!rmm) {
          const Vec g = oracle.grad(s.x);
          s = uld_apply(L, g, s, li.h, li.w1[k], li.w2[k]);
        } else {
          RmmGrads g;
          g.at_x = oracle.grad(s.x);
          const Vec y = uld_rmm_midpoint(L, g.at_x, s, li.h, li.alpha[k], li.w3[k]);
          g.at_y = oracle.grad(y);
          s = uld_rmm_apply(L, g, s, li.h, li.alpha[k], li.w1[k], li.w2[k], li.w3[k]);
        }
      }
      return s;
    };
    const PhaseState ref = run_level(incs.back());
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const PhaseState got = run_level(incs[i]);
      sq_err[i][r] = (got.x - ref.x).squaredNorm();
    }
  });

  OrderSweep sweep;
  sweep.hs = hs;
  for (std::size_t i = 0; i < hs.size(); ++i)
    sweep.rms_errors.push_back(std::sqrt(mean_var(sq_err[i]).mean));
  sweep.slope = loglog_slope(sweep.hs, sweep.rms_errors);
  return sweep;
}

UldBudget uld_budget_for_eps(const FunctionInstance& inst, double eps, double start_distance) {
  if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("uld_budget_for_eps: eps in (0, 1)");
  const double scale = std::sqrt(inst.d / inst.mu + start_distance * start_distance);
  UldBudget b;
  b.h = eps / (104.0 * inst.kappa()) / scale;
  b.T = 0.5 * inst.kappa() * std::log(24.0 * scale / eps);
  b.steps = static_cast<long long>(std::floor(b.T / b.h + 1e-12));
  return b;
}

}  // namespace logz
