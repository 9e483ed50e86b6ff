#include "logz/qwalk.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace logz {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd make_grid(const FunctionInstance& inst, const GridCfg& cfg) {
  const int d = inst.d;
  if (d < 1 || d > 2) throw std::invalid_argument("discretize_chain: d <= 2");
  const int n = cfg.n_per_axis;
  const int total = (d == 1) ? n : n * n;
  if ((d == 1 && total > 512) || (d == 2 && total > 4096))
    throw std::invalid_argument("discretize_chain: grid too large (512 for d=1, 4096 for d=2)");
  const double width = cfg.half_width_sigmas / std::sqrt(inst.mu);
  Eigen::MatrixXd pts(total, d);
  if (d == 1) {
    for (int i = 0; i < n; ++i)
      pts(i, 0) = inst.x_star[0] - width + 2.0 * width * i / (n - 1);
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        pts(i * n + j, 0) = inst.x_star[0] - width + 2.0 * width * i / (n - 1);
        pts(i * n + j, 1) = inst.x_star[1] - width + 2.0 * width * j / (n - 1);
      }
    }
  }
  return pts;
}

Vec grid_pi(const FunctionInstance& inst, const Eigen::MatrixXd& pts) {
  const int N = static_cast<int>(pts.rows());
  Vec logw(N);
  for (int i = 0; i < N; ++i) logw[i] = -inst.f(pts.row(i).transpose());
  const double mx = logw.maxCoeff();
  Vec pi = (logw.array() - mx).exp();
  pi /= pi.sum();
  return pi;
}

}  // namespace

DiscreteChain DiscreteChain::from_matrix(Eigen::MatrixXd P, Vec pi, Eigen::MatrixXd points) {
  DiscreteChain c;
  c.P = std::move(P);
  c.pi = std::move(pi);
  if (points.size() == 0) {
    points.resize(c.P.rows(), 1);
    for (int i = 0; i < c.P.rows(); ++i) points(i, 0) = i;
  }
  c.points = std::move(points);
  return c;
}

DiscreteChain discretize_chain(const FunctionInstance& inst, const GridCfg& cfg, KernelKind kind,
                               double eta) {
  if (eta <= 0.0) throw std::invalid_argument("discretize_chain: eta > 0");
  DiscreteChain chain;
  chain.points = make_grid(inst, cfg);
  chain.pi = grid_pi(inst, chain.points);
  const int N = static_cast<int>(chain.points.rows());
  Vec fx(N);
  for (int i = 0; i < N; ++i) fx[i] = inst.f(chain.points.row(i).transpose());

  Eigen::MatrixXd q(N, N);
  Eigen::MatrixXd acc(N, N);
  if (kind == KernelKind::MhGaussian) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        q(i, j) = std::exp(-(chain.points.row(i) - chain.points.row(j)).squaredNorm() /
                           (2.0 * eta * eta));
    const Vec rows = q.rowwise().sum();
    for (int i = 0; i < N; ++i) q.row(i) /= rows[i];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        acc(i, j) = std::min(1.0, std::exp(fx[i] - fx[j]) * q(j, i) / q(i, j));
  } else {
    if (inst.d != 1) throw std::invalid_argument("discretize_chain: hmc_onestep is 1-d only");
    Vec gx(N);
    for (int i = 0; i < N; ++i) gx[i] = inst.grad(chain.points.row(i).transpose())[0];
    for (int i = 0; i < N; ++i) {
      const double mean = chain.points(i, 0) - 0.5 * eta * eta * gx[i];
      for (int j = 0; j < N; ++j) {
        const double z = (chain.points(j, 0) - mean) / eta;
        q(i, j) = std::exp(-0.5 * z * z);
      }
    }
    // One symmetric scaling keeps every row's proposal mass below 1; the
    // acceptance ratio is scale-invariant so detailed balance is untouched.
    const double scale = q.rowwise().sum().maxCoeff() * (1.0 + 1e-12);
    q /= scale;
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const double v = (chain.points(j, 0) - chain.points(i, 0)) / eta + 0.5 * eta * gx[i];
        const double vt = v - 0.5 * eta * (gx[i] + gx[j]);
        const double dH = fx[i] + 0.5 * v * v - fx[j] - 0.5 * vt * vt;
        acc(i, j) = std::min(1.0, std::exp(dH));
      }
    }
  }

  chain.P = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    double off = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      chain.P(i, j) = q(i, j) * acc(i, j);
      off += chain.P(i, j);
    }
    chain.P(i, i) = 1.0 - off;
  }

  double min_off = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) min_off = std::min(min_off, 1.0 - chain.P(i, i));
  if (min_off < 1e-6)
    throw std::runtime_error("discretize_chain: grid too coarse (off-diagonal mass " +
                             std::to_string(min_off) + " < 1e-6)");
  return chain;
}

double row_sum_residual(const DiscreteChain& chain) {
  return (chain.P.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double detailed_balance_residual(const DiscreteChain& chain) {
  const int N = chain.size();
  double r = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      r = std::max(r, std::fabs(chain.pi[i] * chain.P(i, j) - chain.pi[j] * chain.P(j, i)));
  return r;
}

double stationarity_residual(const DiscreteChain& chain) {
  return (chain.P.transpose() * chain.pi - chain.pi).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd discriminant(const DiscreteChain& chain) {
  const int N = chain.size();
  Eigen::MatrixXd D(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) D(i, j) = std::sqrt(chain.P(i, j) * chain.P(j, i));
  return D;
}

Eigen::MatrixXd walk_operator_dense(const DiscreteChain& chain) {
  const int N = chain.size();
  if (N > 64) throw std::invalid_argument("walk_operator_dense: N <= 64 (dimension N^2)");
  const int M = N * N;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(M, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) T(i * N + j, i) = std::sqrt(chain.P(i, j));
  Eigen::MatrixXd refl = 2.0 * T * T.transpose() - Eigen::MatrixXd::Identity(M, M);
  Eigen::MatrixXd W(M, M);
  // W = S (2 Pi - I): the swap permutes row (i, j) -> (j, i).
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) W.row(i * N + j) = refl.row(j * N + i);
  return W;
}

WalkSpectrum walk_spectrum(const DiscreteChain& chain) {
  WalkSpectrum ws;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(discriminant(chain));
  if (es.info() != Eigen::Success) throw std::runtime_error("walk_spectrum: eigensolver failed");
  Vec lam = es.eigenvalues();
  ws.disc_eigs = lam.reverse();

  const int N = chain.size();
  if (N <= 64) {
    ws.dense = true;
    Eigen::EigenSolver<Eigen::MatrixXd> ew(walk_operator_dense(chain));
    if (ew.info() != Eigen::Success) throw std::runtime_error("walk_spectrum: dense eig failed");
    for (int i = 0; i < ew.eigenvalues().size(); ++i) {
      const std::complex<double> w = ew.eigenvalues()[i];
      ws.phases.push_back(std::atan2(w.imag(), w.real()));
    }
  } else {
    for (int i = 0; i < ws.disc_eigs.size(); ++i) {
      const double l = std::clamp(ws.disc_eigs[i], -1.0, 1.0);
      if (l >= 1.0 - 1e-12) {
        ws.phases.push_back(0.0);
      } else if (l <= -1.0 + 1e-12) {
        ws.phases.push_back(kPi);
      } else {
        ws.phases.push_back(std::acos(l));
        ws.phases.push_back(-std::acos(l));
      }
    }
  }

  ws.delta = (ws.disc_eigs.size() > 1) ? 1.0 - ws.disc_eigs[1] : 0.0;
  ws.phase_gap = kPi;
  for (double p : ws.phases)
    if (std::fabs(p) > 1e-7) ws.phase_gap = std::min(ws.phase_gap, std::fabs(p));
  return ws;
}

double walk_spectral_identity_residual(const DiscreteChain& chain) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(discriminant(chain));
  std::vector<std::complex<double>> theory = {{1.0, 0.0}, {-1.0, 0.0}};
  std::vector<std::complex<double>> pairs;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::clamp(es.eigenvalues()[i], -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - l * l));
    pairs.emplace_back(l, s);
    pairs.emplace_back(l, -s);
  }
  theory.insert(theory.end(), pairs.begin(), pairs.end());

  Eigen::EigenSolver<Eigen::MatrixXd> ew(walk_operator_dense(chain));
  double resid = 0.0;
  for (int i = 0; i < ew.eigenvalues().size(); ++i) {
    const std::complex<double> w = ew.eigenvalues()[i];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : theory) best = std::min(best, std::abs(w - t));
    resid = std::max(resid, best);
  }
  for (const auto& t : pairs) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ew.eigenvalues().size(); ++i)
      best = std::min(best, std::abs(ew.eigenvalues()[i] - t));
    resid = std::max(resid, best);
  }
  return resid;
}

double qsample_overlap(const FunctionInstance& inst, const Schedule& sched, int stage_i,
                       int grid_n, double half_width_sigmas) {
  if (stage_i < 0 || stage_i > sched.M) throw std::invalid_argument("qsample_overlap: stage in [0, M]");
  const FunctionInstance rec = recentered_instance(inst);
  const int d = inst.d;
  if (d < 1 || d > 2) throw std::invalid_argument("qsample_overlap: d <= 2");
  auto stage_scale = [&](int i) {
    if (i == 0) return std::sqrt(sched.sigma_sq.front());
    double inv = rec.mu;
    if (i <= sched.M) inv += 1.0 / sched.sigma_sq[static_cast<std::size_t>(i - 1)];
    return std::sqrt(1.0 / inv);
  };
  const double width = half_width_sigmas * std::max(stage_scale(stage_i), stage_scale(stage_i + 1));

  auto log_masses = [&](int stage, std::vector<double>& out) {
    Vec x(d);
    if (d == 1) {
      out.resize(grid_n);
      for (int i = 0; i < grid_n; ++i) {
        x[0] = -width + 2.0 * width * i / (grid_n - 1);
        out[i] = -stage_neg_log_density(rec, sched, stage, x);
      }
    } else {
      out.resize(static_cast<std::size_t>(grid_n) * grid_n);
      for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
          x[0] = -width + 2.0 * width * i / (grid_n - 1);
          x[1] = -width + 2.0 * width * j / (grid_n - 1);
          out[static_cast<std::size_t>(i) * grid_n + j] = -stage_neg_log_density(rec, sched, stage, x);
        }
      }
    }
  };
  std::vector<double> la, lb;
  log_masses(stage_i, la);
  log_masses(stage_i + 1, lb);
  const double ma = *std::max_element(la.begin(), la.end());
  const double mb = *std::max_element(lb.begin(), lb.end());
  double sa = 0.0, sb = 0.0, cross = 0.0;
  for (std::size_t k = 0; k < la.size(); ++k) {
    const double wa = std::exp(la[k] - ma);
    const double wb = std::exp(lb[k] - mb);
    sa += wa;
    sb += wb;
    cross += std::sqrt(wa * wb);
  }
  return cross / std::sqrt(sa * sb);
}

std::vector<GapProfileEntry> effective_gap_profile(const DiscreteChain& chain, const Vec& rho0) {
  if (rho0.size() != chain.size())
    throw std::invalid_argument("effective_gap_profile: start vector size mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(discriminant(chain));
  const Vec sr = rho0.cwiseMax(0.0).cwiseSqrt();
  std::vector<GapProfileEntry> out;
  for (int i = es.eigenvalues().size() - 1; i >= 0; --i) {
    const double l = es.eigenvalues()[i];
    if (l >= 1.0 - 1e-12) continue;
    // |<phi_rho0 | u_lambda^+->| = |<lambda | sqrt(rho0)>| / sqrt(2)
    const double a = std::fabs(es.eigenvectors().col(i).dot(sr));
    out.push_back({l, a / std::sqrt(2.0)});
  }
  return out;
}

namespace {

double tv_halved(const Vec& a, const Vec& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

}  // namespace

int t_mix_from(const DiscreteChain& chain, const Vec& rho0, double eps, int max_t) {
  Vec r = rho0;
  for (int t = 0; t <= max_t; ++t) {
    if (tv_halved(r, chain.pi) <= eps) return t;
    r = chain.P.transpose() * r;
  }
  return -1;
}

int t_mix_worst(const DiscreteChain& chain, double eps, int max_t) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(chain.size(), chain.size());
  for (int t = 0; t <= max_t; ++t) {
    double worst = 0.0;
    for (int i = 0; i < chain.size(); ++i)
      worst = std::max(worst, tv_halved(M.row(i).transpose(), chain.pi));
    if (worst <= eps) return t;
    M = M * chain.P;
  }
  return -1;
}

EffectiveGapCheck effective_gap_envelope(const DiscreteChain& chain, const Vec& rho0, double eps,
                                         double beta, double c_win, double c_bound) {
  EffectiveGapCheck out;
  out.eps = eps;
  out.t_mix = t_mix_from(chain, rho0, eps);
  out.envelope = c_bound * beta * std::sqrt(eps);
  if (out.t_mix <= 0) {
    out.ok = true;  // start already eps-close; no surviving slow mode to test
    return out;
  }
  const double cutoff = 1.0 - c_win / static_cast<double>(out.t_mix);
  for (const auto& e : effective_gap_profile(chain, rho0)) {
    if (e.lambda < cutoff) continue;
    ++out.eligible_modes;
    out.max_eligible_overlap = std::max(out.max_eligible_overlap, e.overlap);
  }
  out.ok = out.max_eligible_overlap <= out.envelope;
  return out;
}

}  // namespace logz
