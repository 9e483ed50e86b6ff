#include "logz/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace logz {

PathFunctional PathFunctional::w1(double t0, double t1) {
  return {{{t0, t1, 0.0, 1.0, t1}}};
}

PathFunctional PathFunctional::w2(double t0, double t1) {
  return {{{t0, t1, 1.0, -1.0, t1}}};
}

PathFunctional PathFunctional::w3(double t0, double t1, double alpha) {
  const double cut = t0 + alpha * (t1 - t0);
  if (cut <= t0) return {{}};
  return {{{t0, cut, 1.0, -1.0, t1}}};
}

PathFunctional PathFunctional::plain(double a, double c) {
  if (c <= a) return {{}};
  return {{{a, c, 1.0, 0.0, c}}};
}

PathFunctional PathFunctional::partial_exp(double a, double c, double bref) {
  if (c <= a) return {{}};
  return {{{a, c, 0.0, 1.0, bref}}};
}

namespace {

double segment_inner(const ExpSegment& f, const ExpSegment& g) {
  const double lo = std::max(f.a, g.a);
  const double hi = std::min(f.b, g.b);
  if (hi <= lo) return 0.0;
  // The terms cancel down ~12 decades for small steps (Var(W2) ~ h^3 from
  // O(h) terms); extended precision keeps the result accurate to h >= 1e-6.
  auto e2 = [](double s, double ref) {
    return std::exp(static_cast<long double>(2.0) * (s - ref));
  };
  long double out = static_cast<long double>(f.c0) * g.c0 * (hi - lo);
  out += static_cast<long double>(f.c0) * g.c1 * 0.5L * (e2(hi, g.t0) - e2(lo, g.t0));
  out += static_cast<long double>(f.c1) * g.c0 * 0.5L * (e2(hi, f.t0) - e2(lo, f.t0));
  out += static_cast<long double>(f.c1) * g.c1 * 0.25L *
         (std::exp(2.0L * (2.0 * hi - f.t0 - g.t0)) - std::exp(2.0L * (2.0 * lo - f.t0 - g.t0)));
  return static_cast<double>(out);
}

}  // namespace

double functional_inner(const PathFunctional& f, const PathFunctional& g) {
  double s = 0.0;
  for (const auto& fs : f.segs)
    for (const auto& gs : g.segs) s += segment_inner(fs, gs);
  return s;
}

Eigen::MatrixXd functional_covariance(const std::vector<PathFunctional>& fs) {
  const int n = static_cast<int>(fs.size());
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      cov(i, j) = functional_inner(fs[i], fs[j]);
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd cov) {
  const double scale = std::max(1e-300, cov.diagonal().maxCoeff());
  for (double jitter : {0.0, 1e-16, 1e-15, 1e-14}) {
    Eigen::MatrixXd c = cov;
    c.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error("chol_with_jitter: covariance not PSD within 1e-14 jitter");
}

IncrementCovariance uld_covariance(double h) {
  if (h <= 0.0) throw std::invalid_argument("uld_covariance: h > 0");
  IncrementCovariance ic;
  ic.h = h;
  ic.cov = functional_covariance({PathFunctional::w1(0.0, h), PathFunctional::w2(0.0, h)});
  ic.chol = chol_with_jitter(ic.cov);
  return ic;
}

IncrementCovariance uld_rmm_covariance(double h, double alpha) {
  if (h <= 0.0) throw std::invalid_argument("uld_rmm_covariance: h > 0");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("uld_rmm_covariance: alpha in [0,1]");
  IncrementCovariance ic;
  ic.h = h;
  ic.alpha = alpha;
  ic.cov = functional_covariance({PathFunctional::w1(0.0, h), PathFunctional::w2(0.0, h),
                                  PathFunctional::w3(0.0, h, alpha)});
  ic.chol = chol_with_jitter(ic.cov);
  return ic;
}

Eigen::MatrixXd draw_increments(const IncrementCovariance& ic, int dim, Rng& rng) {
  const int k = static_cast<int>(ic.chol.rows());
  Eigen::MatrixXd z(k, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < k; ++r) z(r, c) = normal(rng);
  return ic.chol * z;
}

std::vector<LevelIncrements> sample_coupled_increments(double T,
                                                       const std::vector<LevelSpec>& levels,
                                                       int dim, Rng& rng) {
  if (T <= 0.0 || levels.empty() || dim < 1)
    throw std::invalid_argument("sample_coupled_increments: bad arguments");
  int n_fine = 0;
  for (const auto& lv : levels) {
    if (lv.n_steps < 1) throw std::invalid_argument("sample_coupled_increments: n_steps >= 1");
    n_fine = std::max(n_fine, lv.n_steps);
  }
  for (const auto& lv : levels)
    if (n_fine % lv.n_steps != 0)
      throw std::invalid_argument("sample_coupled_increments: levels must divide the finest grid");

  const double h_fine = T / n_fine;
  const int L = static_cast<int>(levels.size());

  std::vector<LevelIncrements> out(L);
  std::vector<int> m(L);  // fine steps per level step
  for (int l = 0; l < L; ++l) {
    const int n = levels[l].n_steps;
    m[l] = n_fine / n;
    out[l].h = T / n;
    out[l].w1.assign(n, Vec::Zero(dim));
    out[l].w2.assign(n, Vec::Zero(dim));
    if (levels[l].rmm) {
      out[l].w3.assign(n, Vec::Zero(dim));
      out[l].alpha.resize(n);
      for (int k = 0; k < n; ++k) out[l].alpha[k] = uniform(rng);
    }
  }

  // Cached factor for cut-free fine steps (the common case).
  const Eigen::MatrixXd chol2 =
      chol_with_jitter(functional_covariance({PathFunctional::w1(0.0, h_fine),
                                              PathFunctional::w2(0.0, h_fine)}));
  const double tiny = 1e-12 * T;

  for (int j = 0; j < n_fine; ++j) {
    const double a = j * h_fine;
    const double b = (j + 1) * h_fine;

    // Midpoint cuts of enclosing RMM steps that land strictly inside (a, b).
    struct Cut {
      int level;
      double pos;
    };
    std::vector<Cut> cuts;
    for (int l = 0; l < L; ++l) {
      if (!levels[l].rmm) continue;
      const int K = j / m[l];
      const double H = out[l].h;
      const double c = (K + out[l].alpha[static_cast<std::size_t>(K)]) * H;
      if (c > a + tiny && c < b - tiny) cuts.push_back({l, c});
    }

    Eigen::MatrixXd draws;
    if (cuts.empty()) {
      Eigen::MatrixXd z(2, dim);
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < 2; ++r) z(r, c) = normal(rng);
      draws = chol2 * z;
    } else {
      std::vector<PathFunctional> specs = {PathFunctional::w1(a, b), PathFunctional::w2(a, b)};
      for (const auto& cut : cuts) {
        specs.push_back(PathFunctional::plain(a, cut.pos));
        specs.push_back(PathFunctional::partial_exp(a, cut.pos, b));
      }
      const Eigen::MatrixXd chol = chol_with_jitter(functional_covariance(specs));
      const int k = static_cast<int>(specs.size());
      Eigen::MatrixXd z(k, dim);
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < k; ++r) z(r, c) = normal(rng);
      draws = chol * z;
    }
    const Vec w1f = draws.row(0);
    const Vec w2f = draws.row(1);

    for (int l = 0; l < L; ++l) {
      const int K = j / m[l];
      const int p = j - K * m[l];
      const double decay = std::exp(-2.0 * (m[l] - 1 - p) * h_fine);
      out[l].w1[K] += decay * w1f;
      out[l].w2[K] += w2f + (1.0 - decay) * w1f;
      if (!levels[l].rmm) continue;
      const double c = (K + out[l].alpha[static_cast<std::size_t>(K)]) * out[l].h;
      if (b <= c + tiny) {
        out[l].w3[K] += w2f + (1.0 - decay) * w1f;  // fine step fully below the cut
      } else if (c > a + tiny) {
        int idx = -1;
        for (std::size_t q = 0; q < cuts.size(); ++q)
          if (cuts[q].level == l) idx = static_cast<int>(q);
        // int_a^c (1 - e^{2(s - end_K)}) dB = P1 - decay * P2
        const Vec p1 = draws.row(2 + 2 * idx);
        const Vec p2 = draws.row(3 + 2 * idx);
        out[l].w3[K] += p1 - decay * p2;
      }
    }
  }
  return out;
}

}  // namespace logz
