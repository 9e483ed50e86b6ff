#include <doctest.h>

#include <cmath>

#include "logz/brownian.hpp"
#include "logz/stats.hpp"

using namespace logz;

namespace {

// Spec closed forms, written out independently of the segment engine.
double var_w1(double h) { return (1.0 - std::exp(-4.0 * h)) / 4.0; }
double var_w2(double h) {
  return h - (1.0 - std::exp(-2.0 * h)) + (1.0 - std::exp(-4.0 * h)) / 4.0;
}
double cov_w1w2(double h) {
  return (1.0 - std::exp(-2.0 * h)) / 2.0 - (1.0 - std::exp(-4.0 * h)) / 4.0;
}
double var_w3(double h, double a) {
  return a * h - (std::exp(2.0 * (a - 1.0) * h) - std::exp(-2.0 * h)) +
         (std::exp(4.0 * (a - 1.0) * h) - std::exp(-4.0 * h)) / 4.0;
}
double cov_w1w3(double h, double a) {
  return (std::exp(2.0 * (a - 1.0) * h) - std::exp(-2.0 * h)) / 2.0 -
         (std::exp(4.0 * (a - 1.0) * h) - std::exp(-4.0 * h)) / 4.0;
}

// Monte Carlo oracle: midpoint-rule discretization of the defining stochastic
// integrals on a shared Brownian path.
struct McCov {
  double v11, v22, v12, v33, v13, v23;
};
McCov mc_covariance(double h, double alpha, int paths, int substeps, std::uint64_t seed) {
  const double dt = h / substeps;
  const double cut = alpha * h;
  std::vector<double> w1(paths), w2(paths), w3(paths);
  Rng rng = make_rng(seed);
  for (int p = 0; p < paths; ++p) {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    for (int k = 0; k < substeps; ++k) {
      const double lo = k * dt;
      const double hi = lo + dt;
      if (lo >= cut || hi <= cut) {
        const double mid = 0.5 * (lo + hi);
        const double db = std::sqrt(dt) * normal(rng);
        const double e = std::exp(2.0 * (mid - h));
        a1 += e * db;
        a2 += (1.0 - e) * db;
        if (hi <= cut + 1e-15) a3 += (1.0 - e) * db;
      } else {
        // Sub-interval straddling the cut: split at the cut so the W3 oracle
        // integrates exactly up to alpha h.
        for (const auto& [s0, s1] : {std::pair{lo, cut}, std::pair{cut, hi}}) {
          if (s1 <= s0) continue;
          const double mid = 0.5 * (s0 + s1);
          const double db = std::sqrt(s1 - s0) * normal(rng);
          const double e = std::exp(2.0 * (mid - h));
          a1 += e * db;
          a2 += (1.0 - e) * db;
          if (s1 <= cut + 1e-15) a3 += (1.0 - e) * db;
        }
      }
    }
    w1[p] = a1;
    w2[p] = a2;
    w3[p] = a3;
  }
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int p = 0; p < paths; ++p) s += a[p] * b[p];
    return s / paths;
  };
  return {dot(w1, w1), dot(w2, w2), dot(w1, w2), dot(w3, w3), dot(w1, w3), dot(w2, w3)};
}

}  // namespace

TEST_CASE("uld_covariance matches the closed forms") {
  for (double h : {0.01, 0.1, 0.5, 2.0}) {
    const IncrementCovariance ic = uld_covariance(h);
    CHECK(ic.cov(0, 0) == doctest::Approx(var_w1(h)).epsilon(1e-12));
    CHECK(ic.cov(1, 1) == doctest::Approx(var_w2(h)).epsilon(1e-12));
    CHECK(ic.cov(0, 1) == doctest::Approx(cov_w1w2(h)).epsilon(1e-12));
  }
}

TEST_CASE("uld_covariance limits") {
  const IncrementCovariance small = uld_covariance(1e-6);
  CHECK(small.cov(0, 0) / 1e-6 == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(small.cov(0, 0) < 2e-6);
  CHECK(small.cov(1, 1) < 1e-11);
  const IncrementCovariance large = uld_covariance(50.0);
  CHECK(large.cov(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(uld_covariance(0.0), std::invalid_argument);
  CHECK_THROWS_AS(uld_covariance(-1.0), std::invalid_argument);
}

TEST_CASE("rmm covariance matches independent integral arithmetic") {
  for (double h : {0.25, 0.5}) {
    for (double a : {0.3, 0.7, 1.0}) {
      const IncrementCovariance ic = uld_rmm_covariance(h, a);
      CHECK(ic.cov(2, 2) == doctest::Approx(var_w3(h, a)).epsilon(1e-12));
      CHECK(ic.cov(0, 2) == doctest::Approx(cov_w1w3(h, a)).epsilon(1e-12));
      // W3's integrand coincides with W2's below the cut, so Cov(W2, W3) = Var(W3).
      CHECK(ic.cov(1, 2) == doctest::Approx(var_w3(h, a)).epsilon(1e-12));
    }
  }
  CHECK(uld_rmm_covariance(0.5, 0.0).cov(2, 2) == 0.0);
}

TEST_CASE("covariance entries match the Monte Carlo oracle within 3 sigma" *
          doctest::timeout(120)) {
  const int paths = 1000000;
  const double h = 0.5;
  const double a = 0.7;
  const McCov mc = mc_covariance(h, a, paths, 128, 99);
  const IncrementCovariance ic = uld_rmm_covariance(h, a);
  const double se_scale = std::sqrt(2.0 / paths);  // relative s.e. of a second moment
  auto check = [&](double got, double want) {
    CHECK(std::fabs(got - want) <= 3.0 * se_scale * std::max(std::fabs(want), 1e-6));
  };
  check(mc.v11, ic.cov(0, 0));
  check(mc.v22, ic.cov(1, 1));
  check(mc.v12, ic.cov(0, 1));
  check(mc.v33, ic.cov(2, 2));
  check(mc.v13, ic.cov(0, 2));
  check(mc.v23, ic.cov(1, 2));
}

TEST_CASE("cholesky succeeds with jitter <= 1e-14 across step sizes") {
  for (double h : {1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0}) {
    CHECK_NOTHROW(uld_covariance(h));
    CHECK_NOTHROW(uld_rmm_covariance(h, 0.5));
  }
}

TEST_CASE("joint draws reproduce the increment covariance (1e6 draws, 3 sigma)" *
          doctest::timeout(120)) {
  const IncrementCovariance ic = uld_covariance(0.2);
  Rng rng = make_rng(7);
  const int n = 1000000;
  double s11 = 0, s22 = 0, s12 = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXd w = draw_increments(ic, 1, rng);
    s11 += w(0, 0) * w(0, 0);
    s22 += w(1, 0) * w(1, 0);
    s12 += w(0, 0) * w(1, 0);
  }
  const double se = std::sqrt(2.0 / n);
  CHECK(std::fabs(s11 / n - ic.cov(0, 0)) <= 3 * se * ic.cov(0, 0));
  CHECK(std::fabs(s22 / n - ic.cov(1, 1)) <= 3 * se * ic.cov(1, 1));
  CHECK(std::fabs(s12 / n - ic.cov(0, 1)) <= 4 * se * std::sqrt(ic.cov(0, 0) * ic.cov(1, 1)));
}

TEST_CASE("coupled tower: assembled coarse increments have the exact one-step law") {
  // Two ULD levels; the coarse (W1, W2) are linear in the fine draws and must
  // reproduce uld_covariance(T) empirically.
  const double T = 0.8;
  Rng rng = make_rng(21);
  const int n = 200000;
  double s11 = 0, s22 = 0, s12 = 0;
  for (int k = 0; k < n; ++k) {
    const auto incs = sample_coupled_increments(T, {{1, false}, {4, false}}, 1, rng);
    const double w1 = incs[0].w1[0][0];
    const double w2 = incs[0].w2[0][0];
    s11 += w1 * w1;
    s22 += w2 * w2;
    s12 += w1 * w2;
  }
  const IncrementCovariance ic = uld_covariance(T);
  const double se = std::sqrt(2.0 / n);
  CHECK(std::fabs(s11 / n - ic.cov(0, 0)) <= 4 * se * ic.cov(0, 0));
  CHECK(std::fabs(s22 / n - ic.cov(1, 1)) <= 4 * se * ic.cov(1, 1));
  CHECK(std::fabs(s12 / n - ic.cov(0, 1)) <= 4 * se * std::sqrt(ic.cov(0, 0) * ic.cov(1, 1)));
}

TEST_CASE("coupled tower: rmm coarse W3 matches its conditional closed form") {
  // alpha is drawn inside the tower; the residuals W3^2 - Var(W3|alpha) and
  // W1 W3 - Cov(W1, W3|alpha) must average to zero.
  const double T = 0.6;
  Rng rng = make_rng(33);
  const int n = 200000;
  std::vector<double> r_var(n), r_cov(n);
  for (int k = 0; k < n; ++k) {
    const auto incs = sample_coupled_increments(T, {{1, true}, {2, true}}, 1, rng);
    const double a = incs[0].alpha[0];
    const double w1 = incs[0].w1[0][0];
    const double w3 = incs[0].w3[0][0];
    r_var[k] = w3 * w3 - var_w3(T, a);
    r_cov[k] = w1 * w3 - cov_w1w3(T, a);
  }
  const MeanVar mv = mean_var(r_var);
  const MeanVar mc = mean_var(r_cov);
  CHECK(std::fabs(mv.mean) <= 4.0 * std::sqrt(mv.var / n));
  CHECK(std::fabs(mc.mean) <= 4.0 * std::sqrt(mc.var / n));
}

TEST_CASE("coupled tower rejects non-nested grids") {
  Rng rng = make_rng(1);
  CHECK_THROWS_AS(sample_coupled_increments(1.0, {{3, false}, {4, false}}, 1, rng),
                  std::invalid_argument);
}
