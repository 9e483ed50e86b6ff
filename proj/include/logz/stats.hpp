#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace logz {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

inline MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar out;
  out.n = xs.size();
  if (out.n == 0) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.var = ss / static_cast<double>(out.n - 1);
  }
  return out;
}

// Least-squares slope of y against x.
inline double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope_fit: need >= 2 matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0.0) throw std::invalid_argument("slope_fit: degenerate abscissae");
  return num / den;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw std::invalid_argument("loglog_slope: nonpositive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return slope_fit(lx, ly);
}

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

inline double ks_pvalue(double d, std::size_t n, std::size_t m) {
  double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  double t = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * t * t);
  }
  return std::clamp(p, 0.0, 1.0);
}

// Static partition of [0, n) over at most `threads` workers. Deterministic:
// fn(i) owns slot i regardless of thread count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  int workers = std::max(1, threads);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<int>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(workers)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace logz
