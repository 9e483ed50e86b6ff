#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "logz/mala.hpp"
#include "logz/quadrature.hpp"
#include "logz/stats.hpp"

using namespace logz;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

FunctionInstance constant_instance(int d) {
  FunctionInstance inst;
  inst.d = d;
  inst.L = 1.0;
  inst.mu = 1.0;
  inst.x_star = Vec::Zero(d);
  inst.f = [](const Vec&) { return 3.25; };
  inst.grad = [d](const Vec&) { return Vec::Zero(d); };
  inst.tag = "constant";
  return inst;
}

}  // namespace

TEST_CASE("leapfrog: free flight, hand values, reversibility, volume") {
  const FunctionInstance flat = constant_instance(2);
  const Oracle oflat(flat);
  Vec x(2), v(2);
  x << 0.3, -0.7;
  v << 1.0, 0.5;
  const auto [xf, vf] = leapfrog(oflat, x, v, 0.25);
  CHECK((xf - (x + 0.25 * v)).norm() <= 1e-15);
  CHECK((vf - v).norm() <= 1e-15);

  // Gaussian d=1, x=1, v=0, eta=0.1: x~ = 0.995, v~ = -0.09975.
  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  const auto [xg, vg] = leapfrog(og, vec1(1.0), vec1(0.0), 0.1);
  CHECK(xg[0] == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(vg[0] == doctest::Approx(-0.09975).epsilon(1e-12));

  QueryLedger ledger;
  const Oracle counted(g, &ledger);
  leapfrog(counted, vec1(1.0), vec1(0.0), 0.1);
  CHECK(ledger.grad_calls() == 2);

  const FunctionInstance q3 = make_logistic(3);
  const Oracle oq(q3);
  Rng rng = make_rng(9);
  for (int t = 0; t < 100; ++t) {
    const Vec x0 = normal_vec(rng, 3);
    const Vec v0 = normal_vec(rng, 3);
    const auto [x1, v1] = leapfrog(oq, x0, v0, 0.2);
    const auto [x2, v2] = leapfrog(oq, x1, -v1, 0.2);
    CHECK((x2 - x0).norm() <= 1e-12);
    CHECK((v2 + v0).norm() <= 1e-12);
  }

  // Volume preservation: finite-difference Jacobian of (x, v) -> (x~, v~).
  const Vec x0 = vec1(0.4), v0 = vec1(-0.2);
  const double fd = 1e-6;
  Eigen::MatrixXd J(2, 2);
  auto map = [&](const Vec& xx, const Vec& vv) {
    const auto [a, b] = leapfrog(og, xx, vv, 0.3);
    Vec out(2);
    out << a[0], b[0];
    return out;
  };
  J.col(0) = (map(vec1(0.4 + fd), v0) - map(vec1(0.4 - fd), v0)) / (2 * fd);
  J.col(1) = (map(x0, vec1(-0.2 + fd)) - map(x0, vec1(-0.2 - fd))) / (2 * fd);
  CHECK(std::fabs(J.determinant() - 1.0) <= 1e-6);
}

TEST_CASE("hamiltonian values and invariance of acceptance under f + const") {
  const FunctionInstance g = make_gaussian(2);
  const Oracle og(g);
  CHECK(hamiltonian(og, g.x_star, Vec::Zero(2)) == 0.0);
  Vec x(2), v(2);
  x << 1, 0;
  v << 0, 1;
  CHECK(hamiltonian(og, x, v) == doctest::Approx(1.0).epsilon(1e-15));

  FunctionInstance shifted = g;
  shifted.f = [](const Vec& xx) { return 0.5 * xx.squaredNorm() + 10.0; };
  const Oracle os(shifted);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Rng r1 = make_rng(seed), r2 = make_rng(seed);
    const HmcStepResult a = hmc_step(og, x, 0.3, r1);
    const HmcStepResult b = hmc_step(os, x, 0.3, r2);
    CHECK(a.accepted == b.accepted);
    CHECK((a.x - b.x).norm() == 0.0);
  }
}

TEST_CASE("energy drift per leapfrog step is O(eta^3)") {
  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  Rng rng = make_rng(12);
  std::vector<double> etas = {0.2, 0.1, 0.05};
  std::vector<double> drifts;
  for (double eta : etas) {
    double acc = 0.0;
    const int n = 4000;
    Rng local = make_rng(12);
    for (int t = 0; t < n; ++t) {
      const Vec x = normal_vec(local, 1);
      const Vec v = normal_vec(local, 1);
      const auto [xn, vn] = leapfrog(og, x, v, eta);
      acc += std::fabs(hamiltonian(og, xn, vn) - hamiltonian(og, x, v));
    }
    drifts.push_back(acc / n);
  }
  CHECK(loglog_slope(etas, drifts) >= 2.5);
}

TEST_CASE("hmc acceptance: constant f always accepts; gaussian eta=0.05 >= 0.99") {
  const FunctionInstance flat = constant_instance(1);
  const Oracle oflat(flat);
  Rng rng = make_rng(3);
  Vec x = vec1(0.0);
  for (int t = 0; t < 200; ++t) {
    const HmcStepResult r = hmc_step(oflat, x, 0.5, rng);
    CHECK(r.accepted);
    x = r.x;
  }

  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  int accepted = 0;
  x = vec1(0.0);
  for (int t = 0; t < 10000; ++t) {
    const HmcStepResult r = hmc_step(og, x, 0.05, rng);
    accepted += r.accepted ? 1 : 0;
    x = r.x;
  }
  CHECK(accepted >= 9900);
}

TEST_CASE("hmc oracle budget: 2 gradients + 2 evaluations per proposal") {
  const FunctionInstance g = make_gaussian(2);
  QueryLedger ledger;
  const Oracle og(g, &ledger);
  Rng rng = make_rng(4);
  Vec x = Vec::Zero(2);
  int proposals = 0;
  for (int t = 0; t < 500; ++t) {
    const HmcStepResult r = hmc_step(og, x, 0.3, rng, /*lazy=*/true);
    proposals += r.proposed ? 1 : 0;
    x = r.x;
  }
  CHECK(ledger.grad_calls() == 2u * proposals);
  CHECK(ledger.eval_calls() == 2u * proposals);
}

TEST_CASE("laziness holds with frequency 1/2 +- 0.02") {
  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  Rng rng = make_rng(8);
  int held = 0;
  const int n = 10000;
  Vec x = vec1(0.1);
  for (int t = 0; t < n; ++t) {
    const HmcStepResult r = hmc_step(og, x, 0.2, rng, /*lazy=*/true);
    held += r.proposed ? 0 : 1;
    x = r.x;
  }
  CHECK(std::fabs(held / static_cast<double>(n) - 0.5) <= 0.02);
}

TEST_CASE("run_mala: n_steps = 0 returns the start point") {
  const FunctionInstance g = make_gaussian(2);
  const Oracle og(g);
  MalaConfig cfg;
  cfg.n_steps = 0;
  Rng rng = make_rng(5);
  Vec x0(2);
  x0 << 0.5, -0.5;
  const auto out = run_mala(og, StartLaw::Point, x0, cfg, rng);
  CHECK(out.size() == 1);
  CHECK((out[0] - x0).norm() == 0.0);
}

TEST_CASE("wrapper chain: histogram TV to the 1d gaussian <= 0.05 (smoke)" *
          doctest::timeout(300)) {
  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  MalaConfig cfg;
  cfg.eta = wsc21_leapfrog_step(g.L, 1, g.kappa(), 1.0, 0.05);
  cfg.mixing_wrapper = true;
  cfg.wrapper_eps = 0.05;
  cfg.n_steps = 120000;
  Rng rng = make_rng(6);
  const auto samples = run_mala(og, StartLaw::GaussianLinv, g.x_star, cfg, rng);
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s[0]);
  const double tv = histogram_l1_distance(
      xs, [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }, -6.0, 6.0, 50);
  CHECK(tv <= 0.05);
}

TEST_CASE("kappa=10 diagonal quadratic: stationary marginal variances within 5%" *
          doctest::timeout(300)) {
  Vec c(2);
  c << 1.0, 10.0;
  const FunctionInstance q = make_diag_quadratic(c);
  const Oracle oq(q);
  MalaConfig cfg;
  cfg.eta = 0.2;
  cfg.n_steps = 400000;
  Rng rng = make_rng(7);
  const auto samples = run_mala(oq, StartLaw::GaussianLinv, q.x_star, cfg, rng);
  Vec m = Vec::Zero(2), vv = Vec::Zero(2);
  for (const auto& s : samples) m += s;
  m /= static_cast<double>(samples.size());
  for (const auto& s : samples) vv += (s - m).array().square().matrix();
  vv /= static_cast<double>(samples.size() - 1);
  CHECK(vv[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(vv[1] == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("warmness: identities and the gaussian kappa^{1/2} bound on a grid") {
  Vec rho(4), rho0(4);
  rho << 0.25, 0.25, 0.25, 0.25;
  CHECK(warmness(rho, rho) == doctest::Approx(1.0));
  Vec target(4);
  target << 0.1, 0.2, 0.3, 0.4;
  Vec uniform = Vec::Constant(4, 0.25);
  CHECK(warmness(uniform, target) == doctest::Approx(1.0 / (4.0 * 0.1)));
  Vec with_zero(4);
  with_zero << 0.0, 0.2, 0.4, 0.4;
  CHECK(std::isinf(warmness(uniform, with_zero)));

  // kappa = 4 declared on a 1d quadratic: rho0 = N(0, 1/L), rho = N(0, 1/mu).
  const double mu = 0.25, L = 1.0;
  const int n = 2001;
  Vec r0(n), r(n);
  for (int i = 0; i < n; ++i) {
    const double x = -12.0 + 24.0 * i / (n - 1);
    r0[i] = std::exp(-0.5 * L * x * x);
    r[i] = std::exp(-0.5 * mu * x * x);
  }
  r0 /= r0.sum();
  r /= r.sum();
  const double beta = warmness(r0, r);
  CHECK(beta <= std::sqrt(L / mu) + 1e-6);
  CHECK(beta >= std::sqrt(L / mu) - 0.01);
}

TEST_CASE("wrapper samples are exchangeable across seeds (KS at 5%)" * doctest::timeout(300)) {
  const FunctionInstance g = make_gaussian(1);
  const Oracle og(g);
  MalaConfig cfg;
  cfg.eta = 0.5;
  cfg.mixing_wrapper = true;
  cfg.n_steps = 60;
  std::vector<double> even, odd;
  for (int run = 0; run < 200; ++run) {
    Rng rng = make_rng(1000 + run);
    const auto samples = run_mala(og, StartLaw::GaussianLinv, g.x_star, cfg, rng);
    (run % 2 == 0 ? even : odd).push_back(samples.back()[0]);
  }
  const double d = ks_statistic(even, odd);
  CHECK(ks_pvalue(d, even.size(), odd.size()) >= 0.05);
}
