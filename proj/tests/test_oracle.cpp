#include <doctest.h>

#include <cmath>

#include "logz/oracle.hpp"
#include "logz/stats.hpp"

using namespace logz;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Central finite differences of the evaluator, the reference for gradients.
Vec fd_gradient(const FunctionInstance& inst, const Vec& x, double step = 1e-5) {
  Vec g(inst.d);
  for (int i = 0; i < inst.d; ++i) {
    Vec hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (inst.f(hi) - inst.f(lo)) / (2.0 * step);
  }
  return g;
}

std::vector<FunctionInstance> shipped_instances() {
  std::vector<FunctionInstance> out;
  out.push_back(make_gaussian(2));
  out.push_back(make_diag_quadratic(vec2(1.0, 10.0)));
  out.push_back(make_logistic(3));
  return out;
}

}  // namespace

TEST_CASE("evaluate on the shipped instances") {
  const FunctionInstance g = make_gaussian(2);
  CHECK(evaluate(g, vec2(0, 0)) == 0.0);
  CHECK(evaluate(g, vec2(1, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  const FunctionInstance q = make_diag_quadratic(vec2(1.0, 10.0));
  CHECK(evaluate(q, vec2(1, 1)) == doctest::Approx(5.5).epsilon(1e-15));
  CHECK_THROWS_AS(evaluate(g, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("gradient: hand values, stationarity, and finite differences") {
  const FunctionInstance g = make_gaussian(2);
  CHECK((gradient(g, vec2(2, 0)) - vec2(2, 0)).norm() == 0.0);
  const FunctionInstance q = make_diag_quadratic(vec2(1.0, 10.0));
  CHECK((gradient(q, vec2(1, 1)) - vec2(1, 10)).norm() <= 1e-14);
  CHECK_THROWS_AS(gradient(g, Vec::Zero(1)), std::invalid_argument);

  Rng rng = make_rng(5);
  for (const auto& inst : shipped_instances()) {
    CHECK(gradient(inst, inst.x_star).norm() <= 1e-9);
    for (int t = 0; t < 20; ++t) {
      const Vec x = 2.0 * normal_vec(rng, inst.d);
      const Vec ref = fd_gradient(inst, x);
      CHECK((gradient(inst, x) - ref).norm() <= 1e-6 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("strong-convexity quotient stays in [mu, L] over 1e4 random pairs") {
  for (const auto& inst : shipped_instances()) {
    const Vec lo = Vec::Constant(inst.d, -3.0);
    const Vec hi = Vec::Constant(inst.d, 3.0);
    const ConditioningEstimate est = verify_conditioning(inst, lo, hi, 41, 10000);
    CHECK(est.mu_hat >= inst.mu - 1e-6);
    CHECK(est.L_hat <= inst.L + 1e-6);
  }
}

TEST_CASE("verify_conditioning is exact on quadratics") {
  const FunctionInstance g = make_gaussian(2);
  const ConditioningEstimate eg =
      verify_conditioning(g, Vec::Constant(2, -2.0), Vec::Constant(2, 2.0), 17);
  CHECK(eg.mu_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eg.L_hat == doctest::Approx(1.0).epsilon(1e-9));
  const FunctionInstance q = make_diag_quadratic(vec2(1.0, 10.0));
  const ConditioningEstimate eq =
      verify_conditioning(q, Vec::Constant(2, -2.0), Vec::Constant(2, 2.0), 17);
  CHECK(eq.mu_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eq.L_hat == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("noisy_gradient: zero noise is bit-identical to gradient") {
  const FunctionInstance g = make_gaussian(2);
  const NoiseConfig cfg = NoiseConfig::make(g, 0.0, 0.0);
  Rng rng = make_rng(3);
  const Vec x = vec2(0.7, -1.3);
  const Vec noisy = noisy_gradient(g, x, cfg, rng);
  const Vec exact = gradient(g, x);
  CHECK(noisy[0] == exact[0]);
  CHECK(noisy[1] == exact[1]);
}

TEST_CASE("noisy_gradient: empirical mean within l1 0.01 at sigma_sq = 0.01" *
          doctest::timeout(60)) {
  const FunctionInstance g = make_gaussian(2);
  const NoiseConfig cfg = NoiseConfig::make(g, 0.0, 0.01);
  Rng rng = make_rng(11);
  const Vec x = vec2(0.5, -0.25);
  Vec mean = Vec::Zero(2);
  const int n = 100000;
  for (int k = 0; k < n; ++k) mean += noisy_gradient(g, x, cfg, rng);
  mean /= n;
  CHECK((mean - gradient(g, x)).cwiseAbs().sum() <= 0.01);
}

TEST_CASE("noisy_gradient: per-coordinate clipping at L0") {
  const FunctionInstance g = make_gaussian(2);
  NoiseConfig cfg = NoiseConfig::make(g, 0.0, 0.5, 1.0);
  Rng rng = make_rng(17);
  const Vec x = vec2(5.0, 0.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec out = noisy_gradient(g, x, cfg, rng);
    CHECK(std::fabs(out[0]) <= 1.0);
    CHECK(std::fabs(out[1]) <= 1.0);
  }
}

TEST_CASE("noisy_gradient honors the bias and variance contract" * doctest::timeout(60)) {
  const FunctionInstance g = make_gaussian(2);
  const double eps_eval = 1e-12;
  const NoiseConfig cfg = NoiseConfig::make(g, eps_eval, 0.04);
  CHECK(cfg.bias_bound ==
        doctest::Approx(3000.0 * std::pow(2.0, 1.5) * std::sqrt(eps_eval * 1.0)));
  Rng rng = make_rng(23);
  const Vec x = vec2(1.0, 2.0);
  const int n = 100000;
  Vec mean = Vec::Zero(2);
  std::vector<double> c0(n);
  for (int k = 0; k < n; ++k) {
    const Vec out = noisy_gradient(g, x, cfg, rng);
    mean += out;
    c0[k] = out[0];
  }
  mean /= n;
  const double se = std::sqrt(cfg.sigma_sq / 2.0 / n);
  CHECK((mean - gradient(g, x)).cwiseAbs().sum() <= cfg.bias_bound + 6.0 * se);
  // Truncation keeps the per-coordinate variance below sigma_sq / d.
  CHECK(mean_var(c0).var <= cfg.sigma_sq / 2.0 * 1.02);
  CHECK(mean_var(c0).var >= cfg.sigma_sq / 2.0 * 0.8);
}

TEST_CASE("instance serialization round trip") {
  Rng rng = make_rng(31);
  for (const auto& inst : shipped_instances()) {
    const FunctionInstance back = instance_from_json(instance_to_json(inst));
    CHECK(back.d == inst.d);
    CHECK(back.L == doctest::Approx(inst.L).epsilon(1e-14));
    CHECK(back.mu == doctest::Approx(inst.mu).epsilon(1e-14));
    for (int t = 0; t < 10; ++t) {
      const Vec x = normal_vec(rng, inst.d);
      CHECK(back.f(x) == doctest::Approx(inst.f(x)).epsilon(1e-14));
      CHECK((back.grad(x) - inst.grad(x)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("tilted instance: constants and minimizer") {
  const FunctionInstance base = make_diag_quadratic(vec2(1.0, 10.0));
  const FunctionInstance t = tilted_instance(base, 0.5);
  CHECK(t.L == doctest::Approx(12.0));
  CHECK(t.mu == doctest::Approx(3.0));
  CHECK(t.grad(t.x_star).norm() <= 1e-9);
  const FunctionInstance back = instance_from_json(instance_to_json(t));
  CHECK(back.f(vec2(1, 1)) == doctest::Approx(t.f(vec2(1, 1))).epsilon(1e-14));
}
