#include "logz/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "logz/hard_instance.hpp"

namespace logz {

namespace {

void check_dim(const FunctionInstance& inst, const Vec& x, const char* op) {
  if (x.size() != inst.d)
    throw std::invalid_argument(std::string(op) + ": dimension mismatch, expected " +
                                std::to_string(inst.d) + " got " + std::to_string(x.size()));
}

double softplus(double t) {
  // log(1 + e^t) without overflow
  if (t > 30.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

double evaluate(const FunctionInstance& inst, const Vec& x) {
  check_dim(inst, x, "evaluate");
  return inst.f(x);
}

Vec gradient(const FunctionInstance& inst, const Vec& x) {
  check_dim(inst, x, "gradient");
  return inst.grad(x);
}

NoiseConfig NoiseConfig::make(const FunctionInstance& inst, double eps_eval, double sigma_sq,
                              double clip_level) {
  if (eps_eval < 0.0 || sigma_sq < 0.0) throw std::invalid_argument("NoiseConfig: negative noise");
  if (clip_level <= 0.0) throw std::invalid_argument("NoiseConfig: clip_level must be positive");
  NoiseConfig cfg;
  cfg.eps_eval = eps_eval;
  cfg.sigma_sq = sigma_sq;
  cfg.clip_level = clip_level;
  cfg.bias_bound = 3000.0 * std::pow(static_cast<double>(inst.d), 1.5) *
                   std::sqrt(eps_eval * inst.L);
  return cfg;
}

bool NoiseConfig::zero_noise() const {
  return sigma_sq == 0.0 && (!bias_enabled || bias_bound == 0.0);
}

Vec noisy_gradient(const FunctionInstance& inst, const Vec& x, const NoiseConfig& cfg, Rng& rng) {
  check_dim(inst, x, "noisy_gradient");
  Vec g = inst.grad(x);
  if (!cfg.zero_noise()) {
    const int d = inst.d;
    if (cfg.sigma_sq > 0.0) {
      // Truncation at 3 sd by rejection keeps the noise symmetric (zero mean)
      // and its variance strictly below sigma_sq / d per coordinate.
      const double sd = std::sqrt(cfg.sigma_sq / d);
      for (int i = 0; i < d; ++i) {
        double z = normal(rng);
        while (std::fabs(z) > 3.0) z = normal(rng);
        g[i] += sd * z;
      }
    }
    if (cfg.bias_enabled && cfg.bias_bound > 0.0) {
      const double per_coord = cfg.bias_bound / d;
      for (int i = 0; i < d; ++i) g[i] += (i % 2 == 0 ? per_coord : -per_coord);
    }
  }
  if (std::isfinite(cfg.clip_level)) {
    for (int i = 0; i < inst.d; ++i)
      g[i] = std::clamp(g[i], -cfg.clip_level, cfg.clip_level);
  }
  return g;
}

ConditioningEstimate verify_conditioning(const FunctionInstance& inst, const Vec& lo,
                                         const Vec& hi, int grid_points, int pairs,
                                         std::uint64_t seed, QueryLedger* ledger) {
  if (lo.size() != inst.d || hi.size() != inst.d)
    throw std::invalid_argument("verify_conditioning: box dimension mismatch");
  if (grid_points < 2) throw std::invalid_argument("verify_conditioning: grid_points >= 2");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick(0, grid_points - 1);
  auto lattice_point = [&]() {
    Vec x(inst.d);
    for (int i = 0; i < inst.d; ++i) {
      int k = pick(rng);
      x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) / (grid_points - 1);
    }
    return x;
  };
  ConditioningEstimate est;
  est.mu_hat = std::numeric_limits<double>::infinity();
  est.L_hat = -std::numeric_limits<double>::infinity();
  int done = 0;
  while (done < pairs) {
    Vec x = lattice_point();
    Vec y = lattice_point();
    double dist2 = (y - x).squaredNorm();
    if (dist2 < 1e-20) continue;
    if (ledger) {
      ledger->add_eval(2);
      ledger->add_grad(1);
    }
    double q = (inst.f(y) - inst.f(x) - inst.grad(x).dot(y - x)) / (0.5 * dist2);
    est.mu_hat = std::min(est.mu_hat, q);
    est.L_hat = std::max(est.L_hat, q);
    ++done;
  }
  return est;
}

FunctionInstance make_gaussian(int d) {
  if (d < 1) throw std::invalid_argument("make_gaussian: d >= 1");
  FunctionInstance inst;
  inst.d = d;
  inst.L = 1.0;
  inst.mu = 1.0;
  inst.x_star = Vec::Zero(d);
  inst.f = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  inst.grad = [](const Vec& x) { return x; };
  inst.tag = "gaussian";
  inst.spec = json{{"type", "gaussian"}, {"d", d}};
  return inst;
}

FunctionInstance make_diag_quadratic(const Vec& coeffs, double mu_declared, double L_declared) {
  if (coeffs.size() < 1) throw std::invalid_argument("make_diag_quadratic: empty coefficients");
  if (coeffs.minCoeff() < mu_declared || coeffs.maxCoeff() > L_declared)
    throw std::invalid_argument("make_diag_quadratic: coefficients outside [mu, L]");
  FunctionInstance inst;
  inst.d = static_cast<int>(coeffs.size());
  inst.mu = mu_declared;
  inst.L = L_declared;
  inst.x_star = Vec::Zero(inst.d);
  Vec c = coeffs;
  inst.f = [c](const Vec& x) { return 0.5 * (c.array() * x.array().square()).sum(); };
  inst.grad = [c](const Vec& x) -> Vec { return c.array() * x.array(); };
  inst.tag = "diag_quadratic";
  inst.spec = json{{"type", "diag_quadratic"},
                   {"coeffs", std::vector<double>(c.data(), c.data() + c.size())},
                   {"mu", mu_declared},
                   {"L", L_declared}};
  return inst;
}

FunctionInstance make_diag_quadratic(const Vec& coeffs) {
  return make_diag_quadratic(coeffs, coeffs.minCoeff(), coeffs.maxCoeff());
}

FunctionInstance make_diag_quadratic(int d, double kappa) {
  if (d < 1 || kappa < 1.0) throw std::invalid_argument("make_diag_quadratic: d >= 1, kappa >= 1");
  Vec c(d);
  if (d == 1) {
    c[0] = 1.0;
    return make_diag_quadratic(c, 1.0 / kappa, 1.0);  // declared bounds carry the conditioning
  }
  for (int i = 0; i < d; ++i)
    c[i] = 1.0 + (kappa - 1.0) * static_cast<double>(i) / (d - 1);
  return make_diag_quadratic(c);
}

FunctionInstance make_logistic(int d, double mu_reg, double weight) {
  if (d < 1) throw std::invalid_argument("make_logistic: d >= 1");
  // Symmetric +-a_j row pairs keep the minimizer exactly at the origin.
  std::vector<Vec> rows;
  for (int j = 0; j < d; ++j) {
    Vec a = Vec::Zero(d);
    a[j] = 1.0;
    rows.push_back(a);
    rows.push_back(-a);
  }
  for (int j = 0; j + 1 < d; ++j) {
    Vec a = Vec::Zero(d);
    a[j] = 1.0 / std::sqrt(2.0);
    a[j + 1] = 1.0 / std::sqrt(2.0);
    rows.push_back(a);
    rows.push_back(-a);
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (const Vec& a : rows) gram += a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lmax = es.eigenvalues().maxCoeff();

  FunctionInstance inst;
  inst.d = d;
  inst.mu = mu_reg;
  inst.L = mu_reg + 0.25 * weight * lmax;  // sigmoid' <= 1/4
  inst.x_star = Vec::Zero(d);
  inst.f = [rows, mu_reg, weight](const Vec& x) {
    double s = 0.5 * mu_reg * x.squaredNorm();
    for (const Vec& a : rows) s += weight * softplus(a.dot(x));
    return s;
  };
  inst.grad = [rows, mu_reg, weight](const Vec& x) -> Vec {
    Vec g = mu_reg * x;
    for (const Vec& a : rows) g += weight * sigmoid(a.dot(x)) * a;
    return g;
  };
  inst.tag = "logistic";
  inst.spec = json{{"type", "logistic"}, {"d", d}, {"mu_reg", mu_reg}, {"weight", weight}};
  return inst;
}

FunctionInstance tilted_instance(const FunctionInstance& base, double sigma_sq) {
  if (sigma_sq <= 0.0) throw std::invalid_argument("tilted_instance: sigma_sq > 0");
  FunctionInstance inst;
  inst.d = base.d;
  inst.L = base.L + 1.0 / sigma_sq;
  inst.mu = base.mu + 1.0 / sigma_sq;
  auto base_f = base.f;
  auto base_g = base.grad;
  const double inv = 1.0 / sigma_sq;
  inst.f = [base_f, inv](const Vec& x) { return base_f(x) + 0.5 * inv * x.squaredNorm(); };
  inst.grad = [base_g, inv](const Vec& x) -> Vec { return base_g(x) + inv * x; };
  // Minimizer by gradient descent with step 1/L; linear convergence at rate
  // 1 - 1/kappa, run to ~1e-13 gradient norm.
  Vec x = base.x_star * (base.mu / inst.mu);
  const double step = 1.0 / inst.L;
  for (int it = 0; it < 100000; ++it) {
    Vec g = inst.grad(x);
    if (g.norm() <= 1e-13 * std::max(1.0, inst.L)) break;
    x -= step * g;
  }
  inst.x_star = x;
  inst.tag = "tilted";
  inst.spec = json{{"type", "tilted"}, {"sigma_sq", sigma_sq}, {"base", base.spec}};
  return inst;
}

json instance_to_json(const FunctionInstance& inst) { return inst.spec; }

FunctionInstance instance_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") return make_gaussian(j.at("d").get<int>());
  if (type == "diag_quadratic") {
    auto cv = j.at("coeffs").get<std::vector<double>>();
    Vec c = Eigen::Map<const Vec>(cv.data(), static_cast<Eigen::Index>(cv.size()));
    return make_diag_quadratic(c, j.at("mu").get<double>(), j.at("L").get<double>());
  }
  if (type == "logistic")
    return make_logistic(j.at("d").get<int>(), j.at("mu_reg").get<double>(),
                         j.at("weight").get<double>());
  if (type == "tilted")
    return tilted_instance(instance_from_json(j.at("base")), j.at("sigma_sq").get<double>());
  if (type == "hard") return hard_to_function(hard_from_json(j));
  throw std::invalid_argument("instance_from_json: unknown type " + type);
}

}  // namespace logz
