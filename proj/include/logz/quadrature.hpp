#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace logz {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre16 {
  static constexpr std::array<double, 8> nodes = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
      0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
  static constexpr std::array<double, 8> weights = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
};

// Composite Gauss-Legendre over [a, b] with `panels` subintervals.
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           int panels = 64) {
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double mid = lo + 0.5 * w;
    const double half = 0.5 * w;
    for (std::size_t k = 0; k < GaussLegendre16::nodes.size(); ++k) {
      const double t = GaussLegendre16::nodes[k] * half;
      total += GaussLegendre16::weights[k] * half * (f(mid + t) + f(mid - t));
    }
  }
  return total;
}

// Tensor-product quadrature on [ax,bx] x [ay,by].
inline double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                           double ay, double by, int panels = 48) {
  return integrate_1d(
      [&](double x) {
        return integrate_1d([&](double y) { return f(x, y); }, ay, by, panels);
      },
      ax, bx, panels);
}

}  // namespace logz
