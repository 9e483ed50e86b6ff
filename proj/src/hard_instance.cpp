#include "logz/hard_instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "logz/quadrature.hpp"

namespace logz {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cos_sq_half(double z) {
  const double c = std::cos(0.5 * kPi * z);
  return c * c;
}

// Analytic Hessian of q at z (used for amplitude calibration).
Eigen::MatrixXd bump_q_hessian(const Vec& z) {
  const int k = static_cast<int>(z.size());
  Vec c(k), dc(k), ddc(k);
  for (int j = 0; j < k; ++j) {
    c[j] = cos_sq_half(z[j]);
    dc[j] = -0.5 * kPi * std::sin(kPi * z[j]);
    ddc[j] = -0.5 * kPi * kPi * std::cos(kPi * z[j]);
  }
  Eigen::MatrixXd H(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double v = (i == j) ? ddc[i] : dc[i] * dc[j];
      for (int r = 0; r < k; ++r)
        if (r != i && r != j) v *= c[r];
      H(i, j) = v;
    }
  }
  return H;
}

int integer_root(int n, int k) {
  int m = static_cast<int>(std::llround(std::pow(static_cast<double>(n), 1.0 / k)));
  for (int cand = std::max(1, m - 1); cand <= m + 1; ++cand) {
    long long p = 1;
    for (int i = 0; i < k; ++i) p *= cand;
    if (p == n) return cand;
  }
  return -1;
}

// Mass removed from the partition function by a bump of amplitude c on the
// cell centered at v: int_cell e^{-|x|^2/2} (1 - e^{-c q((x-v)/l)}) dx.
double cell_deficit(int k, const Vec& v, double l, double c) {
  if (c == 0.0) return 0.0;
  if (k == 1) {
    return l * integrate_1d(
                   [&](double z) {
                     const double x = v[0] + l * z;
                     return std::exp(-0.5 * x * x) * (1.0 - std::exp(-c * cos_sq_half(z)));
                   },
                   -1.0, 1.0, 2);
  }
  return l * l *
         integrate_2d(
             [&](double z0, double z1) {
               const double x0 = v[0] + l * z0;
               const double x1 = v[1] + l * z1;
               const double q = cos_sq_half(z0) * cos_sq_half(z1);
               return std::exp(-0.5 * (x0 * x0 + x1 * x1)) * (1.0 - std::exp(-c * q));
             },
             -1.0, 1.0, -1.0, 1.0, 1);
}

}  // namespace

double bump_q(const Vec& z) {
  double q = 1.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (std::fabs(z[j]) >= 1.0) return 0.0;
    q *= cos_sq_half(z[j]);
  }
  return q;
}

Vec bump_q_grad(const Vec& z) {
  const Eigen::Index k = z.size();
  Vec g = Vec::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j)
    if (std::fabs(z[j]) >= 1.0) return g;
  for (Eigen::Index j = 0; j < k; ++j) {
    double v = -0.5 * kPi * std::sin(kPi * z[j]);
    for (Eigen::Index i = 0; i < k; ++i)
      if (i != j) v *= cos_sq_half(z[i]);
    g[j] = v;
  }
  return g;
}

double calibrate_bump_amplitude(int k) {
  if (k < 1 || k > 2) throw std::invalid_argument("calibrate_bump_amplitude: k in {1, 2}");
  // Largest c0 keeping eig(I + c0 D^2 q) inside [0.52, 1.48] on a z lattice;
  // the 0.02 margin absorbs off-lattice extrema.
  auto admissible = [&](double c0) {
    const int pts = 41;
    Vec z(k);
    auto scan = [&](auto&& self, int axis) -> bool {
      if (axis == k) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k) + c0 * bump_q_hessian(z);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        return es.eigenvalues().minCoeff() >= 0.52 && es.eigenvalues().maxCoeff() <= 1.48;
      }
      for (int i = 0; i < pts; ++i) {
        z[axis] = -1.0 + 2.0 * i / (pts - 1);
        if (!self(self, axis + 1)) return false;
      }
      return true;
    };
    return scan(scan, 0);
  };
  double lo = 0.0, hi = 1.0;
  if (!admissible(hi)) {
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (admissible(mid) ? lo : hi) = mid;
    }
  } else {
    lo = hi;
  }
  return 0.98 * lo;
}

int HardInstance::n_type2() const {
  return static_cast<int>(std::count(type_bits.begin(), type_bits.end(), 1));
}

Vec HardInstance::cell_center(int cell_index) const {
  Vec v(k);
  const double lo = -1.0 / std::sqrt(static_cast<double>(k));
  int idx = cell_index;
  for (int j = 0; j < k; ++j) {
    v[j] = lo + (2 * (idx % m) + 1) * l;
    idx /= m;
  }
  return v;
}

HardInstance make_hard_instance(int k, int n, double delta_frac, TypeChoice type_choice,
                                Rng& rng) {
  if (k < 1 || k > 2) throw std::invalid_argument("make_hard_instance: k in {1, 2}");
  if (delta_frac < 0.0 || delta_frac >= 0.5)
    throw std::invalid_argument("make_hard_instance: delta_frac in [0, 1/2)");
  const int m = integer_root(n, k);
  if (m <= 0) throw std::invalid_argument("make_hard_instance: n^{1/k} must be an integer");

  HardInstance hi;
  hi.k = k;
  hi.n = n;
  hi.m = m;
  hi.l = 1.0 / (std::sqrt(static_cast<double>(k)) * m);
  hi.c0 = calibrate_bump_amplitude(k);
  const double c_max = hi.c0 * hi.l * hi.l;

  // Equalize the per-cell mass deficit: the deficit at c_max is smallest at
  // the outermost cell, so every other cell can bisect down to it.
  double target = std::numeric_limits<double>::infinity();
  std::vector<double> full(n);
  for (int t = 0; t < n; ++t) {
    full[t] = cell_deficit(k, hi.cell_center(t), hi.l, c_max);
    target = std::min(target, full[t]);
  }
  hi.deficit = target;
  hi.C = target * n;

  // Type assignment: (1/2 + delta) of the cells go to the majority type.
  const int n1 = (type_choice == TypeChoice::MajorityType1)
                     ? static_cast<int>(std::llround((0.5 + delta_frac) * n))
                     : static_cast<int>(std::llround((0.5 - delta_frac) * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  hi.type_bits.assign(n, 0);
  for (int i = n1; i < n; ++i) hi.type_bits[order[i]] = 1;

  hi.c_tau.assign(n, 0.0);
  for (int t = 0; t < n; ++t) {
    if (!hi.type_bits[t]) continue;
    if (full[t] <= target * (1.0 + 1e-12)) {
      hi.c_tau[t] = c_max;
      continue;
    }
    double lo = 0.0, up = c_max;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + up);
      (cell_deficit(k, hi.cell_center(t), hi.l, mid) < target ? lo : up) = mid;
    }
    hi.c_tau[t] = 0.5 * (lo + up);
  }
  return hi;
}

double hard_partition_function(const HardInstance& hi) {
  return std::pow(2.0 * kPi, 0.5 * hi.k) - hi.C * hi.n_type2() / hi.n;
}

FunctionInstance hard_to_function(const HardInstance& hi) {
  const int k = hi.k;
  const double lo = -1.0 / std::sqrt(static_cast<double>(k));
  const double l = hi.l;
  const int m = hi.m;
  auto bits = hi.type_bits;
  auto amps = hi.c_tau;

  auto locate = [k, lo, l, m](const Vec& x) -> int {
    int idx = 0, stride = 1;
    for (int j = 0; j < k; ++j) {
      const double t = (x[j] - lo) / (2.0 * l);
      if (t < 0.0 || t >= m) return -1;
      idx += stride * static_cast<int>(t);
      stride *= m;
    }
    return idx;
  };

  FunctionInstance inst;
  inst.d = k;
  inst.mu = 0.5;
  inst.L = 1.5;
  HardInstance geom = hi;
  inst.f = [geom, bits, amps, locate](const Vec& x) {
    double v = 0.5 * x.squaredNorm();
    int idx = locate(x);
    if (idx >= 0 && bits[idx]) {
      Vec z = (x - geom.cell_center(idx)) / geom.l;
      v += amps[idx] * bump_q(z);
    }
    return v;
  };
  inst.grad = [geom, bits, amps, locate](const Vec& x) -> Vec {
    Vec g = x;
    int idx = locate(x);
    if (idx >= 0 && bits[idx]) {
      Vec z = (x - geom.cell_center(idx)) / geom.l;
      g += (amps[idx] / geom.l) * bump_q_grad(z);
    }
    return g;
  };
  // The bump can push the minimizer slightly off the origin.
  Vec x = Vec::Zero(k);
  for (int it = 0; it < 200000; ++it) {
    Vec g = inst.grad(x);
    if (g.norm() <= 1e-12) break;
    x -= (1.0 / inst.L) * g;
  }
  inst.x_star = x;
  inst.tag = "hard";
  inst.spec = hard_to_json(hi);
  return inst;
}

json hard_to_json(const HardInstance& hi) {
  std::string hex;
  for (std::size_t i = 0; i < hi.type_bits.size(); i += 4) {
    int nib = 0;
    for (std::size_t b = 0; b < 4 && i + b < hi.type_bits.size(); ++b)
      nib |= (hi.type_bits[i + b] ? 1 : 0) << b;
    hex += "0123456789abcdef"[nib];
  }
  return json{{"type", "hard"},       {"k", hi.k},           {"n", hi.n},
              {"c0", hi.c0},          {"deficit", hi.deficit}, {"C", hi.C},
              {"type_bits_hex", hex}, {"c_tau", hi.c_tau}};
}

HardInstance hard_from_json(const json& j) {
  HardInstance hi;
  hi.k = j.at("k").get<int>();
  hi.n = j.at("n").get<int>();
  hi.m = integer_root(hi.n, hi.k);
  if (hi.m <= 0) throw std::invalid_argument("hard_from_json: bad cell count");
  hi.l = 1.0 / (std::sqrt(static_cast<double>(hi.k)) * hi.m);
  hi.c0 = j.at("c0").get<double>();
  hi.deficit = j.at("deficit").get<double>();
  hi.C = j.at("C").get<double>();
  const std::string hex = j.at("type_bits_hex").get<std::string>();
  hi.type_bits.assign(hi.n, 0);
  for (int i = 0; i < hi.n; ++i) {
    const char c = hex.at(i / 4);
    const int nib = (c <= '9') ? c - '0' : c - 'a' + 10;
    hi.type_bits[i] = (nib >> (i % 4)) & 1;
  }
  hi.c_tau = j.at("c_tau").get<std::vector<double>>();
  return hi;
}

}  // namespace logz
