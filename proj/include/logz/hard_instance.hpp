#pragma once

#include <cstdint>
#include <vector>

#include "logz/oracle.hpp"
#include "logz/rng.hpp"

namespace logz {

// Lower-bound hard instance: f0(x) = |x|^2/2 plus, on each type-2 cell of a
// lattice over [-1/sqrt(k), 1/sqrt(k)]^k, a smooth compactly supported bump
// c_tau q((x - v_tau)/l) with q(z) = prod_j cos^2(pi z_j / 2). Amplitudes are
// equalized so every type-2 cell removes the same mass `deficit` from the
// partition function:
//   Z = (2 pi)^{k/2} - C * n2 / n,   C = n * deficit.
struct HardInstance {
  int k = 1;          // dimension
  int n = 1;          // total cells = m^k
  int m = 1;          // cells per axis
  double l = 0.0;     // cell half-width, 1 / (sqrt(k) m)
  double c0 = 0.0;    // calibrated base amplitude constant (c_max = c0 l^2)
  double deficit = 0.0;
  double C = 0.0;
  std::vector<std::uint8_t> type_bits;  // 1 = type 2 (bump present)
  std::vector<double> c_tau;            // per-cell amplitude (0 for type-1 cells)

  int n_type2() const;
  Vec cell_center(int cell_index) const;
};

enum class TypeChoice { MajorityType1, MajorityType2 };

// delta_frac in (0, 1/2); a (1/2 +- delta_frac) fraction of cells becomes
// type 1 per type_choice, the assignment shuffled by rng. Rejects n without an
// integer k-th root. Only k in {1, 2} is supported (quadrature cost).
HardInstance make_hard_instance(int k, int n, double delta_frac, TypeChoice type_choice, Rng& rng);

FunctionInstance hard_to_function(const HardInstance& hi);

// Exact by construction: (2 pi)^{k/2} - C * n2 / n.
double hard_partition_function(const HardInstance& hi);

// Bump amplitude constant keeping Hessian eigenvalues of f0 + c0 l^2 q(./l)
// inside [0.5, 1.5], found by bisection on a numerical-Hessian check.
double calibrate_bump_amplitude(int k);

double bump_q(const Vec& z);
Vec bump_q_grad(const Vec& z);

json hard_to_json(const HardInstance& hi);
HardInstance hard_from_json(const json& j);

}  // namespace logz
