#include "logz/anneal.hpp"

#include <cmath>
#include <stdexcept>

#include "logz/langevin.hpp"
#include "logz/mala.hpp"
#include "logz/mlmc.hpp"
#include "logz/stats.hpp"

namespace logz {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Vec rejection_sample(const FunctionInstance& rec, double inv_sigma_sq, Rng& rng,
                     QueryLedger* ledger) {
  const double prec = rec.mu + inv_sigma_sq;
  const double sd = 1.0 / std::sqrt(prec);
  for (int tries = 0; tries < 1000000; ++tries) {
    const Vec x = sd * normal_vec(rng, rec.d);
    if (ledger) ledger->add_eval();
    const double log_acc = -(rec.f(x) - 0.5 * rec.mu * x.squaredNorm());
    if (std::log(std::max(uniform(rng), 1e-300)) <= log_acc) return x;
  }
  throw std::runtime_error("rejection_sample: acceptance never triggered");
}

Schedule build_schedule(int d, double L, double mu, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("build_schedule: eps in (0, 1)");
  if (!(L >= mu && mu > 0.0)) throw std::invalid_argument("build_schedule: need L >= mu > 0");
  if (d < 1) throw std::invalid_argument("build_schedule: d >= 1");
  Schedule s;
  s.d = d;
  s.L = L;
  s.mu = mu;
  s.eps = eps;
  const double ratio = 1.0 + 1.0 / std::sqrt(static_cast<double>(d));
  const double stop = 2.0 * std::sqrt(static_cast<double>(d)) / mu;
  double sig = eps / (2.0 * d * L);
  s.sigma_sq.push_back(sig);
  while (sig < stop) {
    sig *= ratio;
    s.sigma_sq.push_back(sig);
  }
  s.M = static_cast<int>(s.sigma_sq.size());
  return s;
}

double g_ratio(const Schedule& sched, int i, const Vec& x) {
  if (i < 0 || i >= sched.M) throw std::out_of_range("g_ratio: stage index in [0, M)");
  const double inv_i = 1.0 / sched.sigma_sq[static_cast<std::size_t>(i)];
  const double inv_next =
      (i + 1 < sched.M) ? 1.0 / sched.sigma_sq[static_cast<std::size_t>(i + 1)] : 0.0;
  return std::exp(0.5 * (inv_i - inv_next) * x.squaredNorm());
}

double stage_r_plus(const Schedule& sched, int i, double mean_norm_next, double eps) {
  if (i < 0 || i >= sched.M) throw std::out_of_range("stage_r_plus: stage index in [0, M)");
  const double a = sched.alpha();
  return mean_norm_next + std::sqrt(sched.sigma_sq[static_cast<std::size_t>(i)]) *
                              std::sqrt((1.0 + a) * std::log(1.0 / eps));
}

double truncation_cap(const Schedule& sched, int i, double r_plus) {
  if (i < 0 || i >= sched.M) throw std::out_of_range("truncation_cap: stage index in [0, M)");
  const double a = sched.alpha();
  return std::exp(r_plus * r_plus /
                  (sched.sigma_sq[static_cast<std::size_t>(i)] * (1.0 + 1.0 / a)));
}

double truncated_g(const Schedule& sched, int i, const Vec& x, double r_plus) {
  return std::min(g_ratio(sched, i, x), truncation_cap(sched, i, r_plus));
}

double relative_variance(const std::vector<double>& g_values) {
  if (g_values.size() < 2) throw std::invalid_argument("relative_variance: need >= 2 samples");
  const MeanVar mv = mean_var(g_values);
  if (mv.mean == 0.0) throw std::invalid_argument("relative_variance: zero-mean payoff");
  if (mv.var == 0.0) {
    bool constant = true;
    for (double g : g_values) constant = constant && (g == g_values.front());
    if (!constant) throw std::invalid_argument("relative_variance: degenerate samples");
    return 1.0;
  }
  double second = 0.0;
  for (double g : g_values) second += g * g;
  second /= static_cast<double>(g_values.size());
  return second / (mv.mean * mv.mean);
}

double stage_neg_log_density(const FunctionInstance& rec, const Schedule& sched, int i,
                             const Vec& x) {
  if (i < 0 || i > sched.M + 1) throw std::out_of_range("stage index in [0, M+1]");
  if (i == 0) return 0.5 * x.squaredNorm() / sched.sigma_sq.front();
  double v = rec.f(x);
  if (i <= sched.M) v += 0.5 * x.squaredNorm() / sched.sigma_sq[static_cast<std::size_t>(i - 1)];
  return v;
}

FunctionInstance recentered_instance(const FunctionInstance& inst) {
  FunctionInstance rec;
  rec.d = inst.d;
  rec.L = inst.L;
  rec.mu = inst.mu;
  rec.x_star = Vec::Zero(inst.d);
  const Vec shift = inst.x_star;
  const double f0 = inst.f(inst.x_star);
  auto base_f = inst.f;
  auto base_g = inst.grad;
  rec.f = [base_f, shift, f0](const Vec& x) { return base_f(x + shift) - f0; };
  rec.grad = [base_g, shift](const Vec& x) { return base_g(x + shift); };
  rec.tag = "recentered:" + inst.tag;
  rec.spec = inst.spec;
  return rec;
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "uld") return SamplerKind::ULD;
  if (name == "uld_rmm") return SamplerKind::ULD_RMM;
  if (name == "mala") return SamplerKind::MALA;
  if (name == "exact_rejection") return SamplerKind::ExactRejection;
  throw std::invalid_argument("unknown sampler: " + name);
}

const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::ULD: return "uld";
    case SamplerKind::ULD_RMM: return "uld_rmm";
    case SamplerKind::MALA: return "mala";
    case SamplerKind::ExactRejection: return "exact_rejection";
  }
  return "unknown";
}

ZEstimate estimate_Z(const FunctionInstance& inst, const Schedule& sched,
                     const EstimateZConfig& cfg, Rng& rng, QueryLedger* ledger) {
  if (cfg.K < 30) throw std::invalid_argument("estimate_Z: K >= 30");
  const FunctionInstance rec = recentered_instance(inst);
  const Oracle oracle(rec, ledger);
  const int d = rec.d;

  ZEstimate est;
  est.z_hat = std::pow(2.0 * kPi * sched.sigma_sq.front(), 0.5 * d);

  std::vector<Vec> particles(static_cast<std::size_t>(cfg.K));
  const std::uint64_t seed = rng();
  {
    Rng init = make_rng(seed, 1u << 20);
    const double sd0 = std::sqrt(sched.sigma_sq.front());
    for (auto& p : particles) p = sd0 * normal_vec(init, d);
  }

  for (int i = 0; i < sched.M; ++i) {
    const double sig_sq = sched.sigma_sq[static_cast<std::size_t>(i)];
    const FunctionInstance stage_inst = tilted_instance(rec, sig_sq);
    const Oracle stage_oracle(stage_inst, ledger);
    const std::uint64_t eval0 = ledger ? ledger->eval_calls() : 0;
    const std::uint64_t grad0 = ledger ? ledger->grad_calls() : 0;

    const int burn = (i == 0) ? 2 * cfg.burn_steps : cfg.burn_steps;
    parallel_for(particles.size(), cfg.threads, [&](std::size_t k) {
      Rng prng = make_rng(seed, (static_cast<std::uint64_t>(i) << 32) + k);
      Vec x = particles[k];
      switch (cfg.sampler) {
        case SamplerKind::MALA: {
          const double eta =
              cfg.step_scale * 0.8 / (std::sqrt(stage_inst.L) * std::pow(d, 1.0 / 6.0));
          for (int t = 0; t < burn; ++t) x = hmc_step(stage_oracle, x, eta, prng).x;
          break;
        }
        case SamplerKind::ULD:
        case SamplerKind::ULD_RMM: {
          const double h = cfg.step_scale * 0.25 / std::sqrt(stage_inst.L);
          const Scheme scheme =
              (cfg.sampler == SamplerKind::ULD) ? Scheme::ULD : Scheme::ULD_RMM;
          const Trajectory traj = run_chain(stage_oracle, x, h, burn * h, prng, scheme);
          x = traj.states.back().x;
          break;
        }
        case SamplerKind::ExactRejection: {
          x = rejection_sample(rec, 1.0 / sig_sq, prng, ledger);
          break;
        }
      }
      particles[k] = x;
    });

    bool finite = true;
    for (const auto& p : particles) finite = finite && p.allFinite();
    if (!finite) {
      est.diverged = true;
      est.diverged_stage = i + 1;
      return est;
    }

    std::vector<double> gs(particles.size());
    for (std::size_t k = 0; k < particles.size(); ++k)
      gs[k] = cfg.payoff_one ? 1.0 : g_ratio(sched, i, particles[k]);
    const MeanVar mv = mean_var(gs);

    StageDiag diag;
    diag.stage = i + 1;
    diag.sigma_sq = sig_sq;
    diag.mean_g = mv.mean;
    diag.rel_var = cfg.payoff_one ? 1.0 : relative_variance(gs);
    diag.eval_calls = (ledger ? ledger->eval_calls() : 0) - eval0;
    diag.grad_calls = (ledger ? ledger->grad_calls() : 0) - grad0;
    est.stages.push_back(diag);
    est.z_hat *= mv.mean;
  }
  est.z_hat *= std::exp(-inst.f(inst.x_star));
  return est;
}

ZEstimate estimate_Z_mlmc(const FunctionInstance& inst, const Schedule& sched, double eps_total,
                          const ZMlmcConfig& cfg, Rng& rng, QueryLedger* ledger) {
  const FunctionInstance rec = recentered_instance(inst);
  const int d = rec.d;
  const Scheme scheme = cfg.scheme_rmm ? Scheme::ULD_RMM : Scheme::ULD;

  ZEstimate est;
  est.z_hat = std::pow(2.0 * kPi * sched.sigma_sq.front(), 0.5 * d);
  const std::uint64_t seed = rng();

  // Pilot mean norms of the next stage drive the truncation radius r_i^+.
  auto pilot_stage = [&](int stage, double* mean_norm, std::vector<Vec>* finals) {
    const double inv = (stage <= sched.M - 1)
                           ? 1.0 / sched.sigma_sq[static_cast<std::size_t>(stage)]
                           : 0.0;
    const FunctionInstance pil = tilted_instance(rec, inv > 0.0 ? 1.0 / inv : 1e18);
    const Oracle po(pil, ledger);
    const int n_pilot = 64;
    const double T = 6.0 * std::max(1.0, pil.kappa());
    std::vector<double> norms(n_pilot);
    std::vector<Vec> xs(n_pilot);
    parallel_for(n_pilot, cfg.threads, [&](std::size_t k) {
      Rng prng = make_rng(seed, (static_cast<std::uint64_t>(stage) << 24) + 7000 + k);
      const Trajectory traj = run_chain(po, Vec::Zero(d), T / 64.0, T, prng, scheme);
      xs[k] = traj.states.back().x;
      norms[k] = xs[k].norm();
    });
    *mean_norm = mean_var(norms).mean;
    if (finals) *finals = xs;
  };

  for (int i = 0; i < sched.M; ++i) {
    const double sig_sq = sched.sigma_sq[static_cast<std::size_t>(i)];
    const FunctionInstance stage_inst = tilted_instance(rec, sig_sq);
    const Oracle stage_oracle(stage_inst, ledger);
    const std::uint64_t eval0 = ledger ? ledger->eval_calls() : 0;
    const std::uint64_t grad0 = ledger ? ledger->grad_calls() : 0;

    double mean_norm_next = 0.0;
    pilot_stage(i + 1, &mean_norm_next, nullptr);
    const double r_plus = stage_r_plus(sched, i, mean_norm_next, eps_total);
    const Payoff payoff = [&sched, i, r_plus](const Vec& x) {
      return truncated_g(sched, i, x, r_plus);
    };

    double mean_norm_here = 0.0;
    std::vector<Vec> pilot_finals;
    pilot_stage(i, &mean_norm_here, &pilot_finals);
    std::vector<double> pilot_g(pilot_finals.size());
    for (std::size_t k = 0; k < pilot_finals.size(); ++k) pilot_g[k] = payoff(pilot_finals[k]);
    const double pilot_mean = mean_var(pilot_g).mean;

    const double tol_rel = eps_total / (2.0 * sched.M);
    const double tol_abs = std::max(1e-12, tol_rel * pilot_mean);
    const double T = cfg.t_factor *
                     std::max(4.0, 2.0 * stage_inst.kappa() *
                                       std::log(40.0 * sched.M * d / eps_total));

    MlmcOptions opt;
    opt.n0 = cfg.n0;
    opt.pilot = 100;
    opt.threads = cfg.threads;
    Rng mrng = make_rng(seed, (static_cast<std::uint64_t>(i) << 16) + 3);
    const MlmcResult mr =
        mlmc_estimate(stage_oracle, payoff, Vec::Zero(d), T, tol_abs, scheme, opt, mrng);
    if (!mr.ok) {
      est.diverged = true;
      est.diverged_stage = i + 1;
      return est;
    }

    StageDiag diag;
    diag.stage = i + 1;
    diag.sigma_sq = sig_sq;
    diag.mean_g = mr.estimate;
    diag.rel_var = relative_variance(pilot_g);
    diag.eval_calls = (ledger ? ledger->eval_calls() : 0) - eval0;
    diag.grad_calls = (ledger ? ledger->grad_calls() : 0) - grad0;
    est.stages.push_back(diag);
    est.z_hat *= mr.estimate;
  }
  est.z_hat *= std::exp(-inst.f(inst.x_star));
  return est;
}

}  // namespace logz
