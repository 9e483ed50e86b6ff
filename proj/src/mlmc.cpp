#include "logz/mlmc.hpp"

#include <cmath>
#include <stdexcept>

#include "logz/stats.hpp"

namespace logz {

namespace {

PhaseState integrate_level(const Oracle& oracle, const Vec& x0, const LevelIncrements& li,
                           bool rmm) {
  const double L = oracle.instance().L;
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
}

}  // namespace

CoupledSample coupled_level_sample(const Oracle& oracle, const Payoff& payoff, const Vec& x0,
                                   int level, double T, int n0, Scheme scheme, Rng& rng) {
  if (level < 0 || n0 < 1 || T <= 0.0)
    throw std::invalid_argument("coupled_level_sample: bad arguments");
  const bool rmm = scheme == Scheme::ULD_RMM;
  CoupledSample out;
  if (level == 0) {
    const auto incs = sample_coupled_increments(T, {{n0, rmm}}, static_cast<int>(x0.size()), rng);
    const PhaseState fine = integrate_level(oracle, x0, incs[0], rmm);
    if (!fine.x.allFinite()) {
      out.ok = false;
      return out;
    }
    out.diff = payoff(fine.x);
    return out;
  }
  const int n_coarse = n0 << (level - 1);
  const int n_fine = n0 << level;
  const auto incs = sample_coupled_increments(T, {{n_coarse, rmm}, {n_fine, rmm}},
                                              static_cast<int>(x0.size()), rng);
  const PhaseState coarse = integrate_level(oracle, x0, incs[0], rmm);
  const PhaseState fine = integrate_level(oracle, x0, incs[1], rmm);
  if (!coarse.x.allFinite() || !fine.x.allFinite()) {
    out.ok = false;
    return out;
  }
  out.diff = payoff(fine.x) - payoff(coarse.x);
  return out;
}

RateFit fit_rates(const std::vector<LevelStats>& stats) {
  if (stats.size() < 4) throw std::invalid_argument("fit_rates: need >= 4 levels");
  std::vector<double> ls, lm, lv, lc;
  for (const auto& st : stats) {
    ls.push_back(static_cast<double>(st.level));
    lm.push_back(std::log2(std::max(std::fabs(st.mean_diff), 1e-300)));
    lv.push_back(std::log2(std::max(st.var_diff, 1e-300)));
    lc.push_back(std::log2(std::max(st.cost, 1e-300)));
  }
  RateFit fit;
  fit.alpha = -slope_fit(ls, lm);
  fit.beta = -slope_fit(ls, lv);
  fit.gamma = slope_fit(ls, lc);
  return fit;
}

MlmcResult mlmc_estimate(const Oracle& oracle, const Payoff& payoff, const Vec& x0, double T,
                         double eps, Scheme scheme, const MlmcOptions& opt, Rng& rng) {
  if (eps <= 0.0 || eps >= 1.0 / std::exp(1.0))
    throw std::invalid_argument("mlmc_estimate: eps in (0, 1/e)");
  const double grad_per_step = (scheme == Scheme::ULD_RMM) ? 2.0 : 1.0;
  auto level_cost = [&](int l) {
    const double fine = static_cast<double>(opt.n0) * std::pow(2.0, l);
    return grad_per_step * (l == 0 ? fine : fine * 1.5);  // fine + coarse
  };

  struct LevelAcc {
    std::vector<double> samples;
    long long attempts = 0;
    long long flagged = 0;
  };
  std::vector<LevelAcc> acc;

  // Deterministic per-(level, attempt-index) streams so thread count cannot
  // change results. Flagged (non-finite) samples are excluded and counted.
  const std::uint64_t base_seed = rng();
  auto sample_more = [&](int l, long long target) {
    auto& a = acc[static_cast<std::size_t>(l)];
    while (static_cast<long long>(a.samples.size()) < target) {
      const long long want = target - static_cast<long long>(a.samples.size());
      std::vector<double> vals(static_cast<std::size_t>(want));
      std::vector<char> good(static_cast<std::size_t>(want), 0);
      const long long first = a.attempts;
      parallel_for(static_cast<std::size_t>(want), opt.threads, [&](std::size_t k) {
        Rng r = make_rng(base_seed, (static_cast<std::uint64_t>(l) << 40) +
                                        static_cast<std::uint64_t>(first) + k);
        const CoupledSample s = coupled_level_sample(oracle, payoff, x0, l, T, opt.n0, scheme, r);
        vals[k] = s.diff;
        good[k] = s.ok ? 1 : 0;
      });
      a.attempts += want;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        if (good[k])
          a.samples.push_back(vals[k]);
        else
          ++a.flagged;
      }
      if (a.flagged > 100 + a.attempts / 2)
        throw std::runtime_error("mlmc_estimate: too many non-finite trajectories");
    }
  };

  MlmcResult res;
  int L = std::max(4, opt.start_levels - 1);
  acc.resize(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) sample_more(l, opt.pilot);

  auto rebuild_stats = [&]() {
    res.levels.clear();
    for (int l = 0; l <= L; ++l) {
      const MeanVar mv = mean_var(acc[static_cast<std::size_t>(l)].samples);
      LevelStats st;
      st.level = l;
      st.n_steps = static_cast<long long>(opt.n0) << l;
      st.mean_diff = mv.mean;
      st.var_diff = mv.var;
      st.cost = level_cost(l);
      st.n_samples = static_cast<long long>(mv.n);
      res.levels.push_back(st);
    }
  };
  rebuild_stats();

  // Constant payoff: every correction level vanishes identically.
  bool all_zero = true;
  for (std::size_t l = 1; l < res.levels.size(); ++l)
    if (res.levels[l].mean_diff != 0.0 || res.levels[l].var_diff != 0.0) all_zero = false;
  if (all_zero && res.levels[0].var_diff == 0.0) {
    res.estimate = res.levels[0].mean_diff;
    res.rates = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 1.0};
    res.total_cost = 0.0;
    for (const auto& st : res.levels) res.total_cost += st.cost * st.n_samples;
    res.ok = true;
    res.diagnostic = "constant payoff";
    return res;
  }

  // Grow the max level until the fitted-alpha bias estimate is within budget.
  while (true) {
    std::vector<LevelStats> fit_levels(res.levels.begin() + 1, res.levels.end());
    res.rates = fit_rates(fit_levels);
    if (!(res.rates.alpha > 0.1) || !(res.rates.beta > 0.1)) {
      res.ok = false;
      res.diagnostic = "rate fit failed: level differences do not decay (alpha_hat " +
                       std::to_string(res.rates.alpha) + ", beta_hat " +
                       std::to_string(res.rates.beta) + ")";
      return res;
    }
    const double bias =
        std::fabs(res.levels.back().mean_diff) / (std::pow(2.0, res.rates.alpha) - 1.0);
    if (bias <= 0.5 * eps) break;
    if (L >= opt.max_level) {
      res.ok = false;
      res.diagnostic = "max level reached before bias target";
      return res;
    }
    ++L;
    acc.resize(static_cast<std::size_t>(L) + 1);
    sample_more(L, opt.pilot);
    rebuild_stats();
  }

  // N_l ~ sqrt(V_l / C_l), variance budget eps^2 / 2.
  for (int round = 0; round < 4; ++round) {
    double lam = 0.0;
    for (const auto& st : res.levels) lam += std::sqrt(std::max(st.var_diff, 0.0) * st.cost);
    lam *= 2.0 / (eps * eps);
    bool grew = false;
    for (int l = 0; l <= L; ++l) {
      const auto& st = res.levels[static_cast<std::size_t>(l)];
      const long long want = static_cast<long long>(
          std::ceil(lam * std::sqrt(std::max(st.var_diff, 0.0) / st.cost)));
      if (want > st.n_samples) {
        sample_more(l, want);
        grew = true;
      }
    }
    rebuild_stats();
    if (!grew) break;
  }

  res.estimate = 0.0;
  res.total_cost = 0.0;
  long long flagged = 0;
  for (int l = 0; l <= L; ++l) {
    res.estimate += res.levels[static_cast<std::size_t>(l)].mean_diff;
    res.total_cost += res.levels[static_cast<std::size_t>(l)].cost *
                      res.levels[static_cast<std::size_t>(l)].n_samples;
    flagged += acc[static_cast<std::size_t>(l)].flagged;
  }
  res.ok = true;
  if (flagged > 0) res.diagnostic = std::to_string(flagged) + " non-finite samples excluded";
  return res;
}

}  // namespace logz
