#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace logz {

using Rng = std::mt19937_64;
using Vec = Eigen::VectorXd;

// SplitMix64 scramble of (seed, stream). Replicas and worker threads derive
// their streams from one user seed without overlap.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Fresh distribution objects per call: std::normal_distribution carries a
// cached spare variate, and call-site-independent draws keep streams
// reproducible regardless of call order.
inline double normal(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return n01(rng);
}

inline double uniform(Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  return u01(rng);
}

inline Vec normal_vec(Rng& rng, Eigen::Index d) {
  Vec z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
  return z;
}

}  // namespace logz
