#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rbuq/types.hpp"

namespace rbuq {

inline constexpr double kSqrt3 = 1.7320508075688772935;

/// Fixed Monte Carlo sample set on [-sqrt(3), sqrt(3)]^K.
///
/// Samples come from mt19937_64 (fully specified by the C++ standard) with
/// an explicit 53-bit-mantissa uniform mapping, so regeneration from the
/// same seed is bitwise reproducible on any platform. Streaming order is
/// row-major: sample index outer, dimension inner.
struct SampleSet {
  Matrix samples; // N_xi x K
  std::uint64_t seed = 0;
  int N_xi = 0;
  int K = 0;

  Vector sample(int i) const { return samples.row(i).transpose(); }
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

inline SampleSet draw_mc_samples(int N_xi, int K, std::uint64_t seed) {
  if (N_xi < 2)
    throw ConfigError("draw_mc_samples: N_xi must be >= 2 (the variance estimator divides by N_xi-1)");
  if (K < 1) throw ConfigError("draw_mc_samples: K must be >= 1");

  SampleSet set;
  set.seed = seed;
  set.N_xi = N_xi;
  set.K = K;
  set.samples.resize(N_xi, K);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < N_xi; ++i) {
    for (int k = 0; k < K; ++k) {
      set.samples(i, k) = -kSqrt3 + 2.0 * kSqrt3 * detail::uniform01(rng);
    }
  }
  return set;
}

/// Uniform points in the box [lo, hi] (componentwise), same PRNG and
/// streaming convention as draw_mc_samples; used for the deterministic
/// parameter training and test sets.
inline Matrix draw_uniform_points(int count, const Vector& lo, const Vector& hi,
                                  std::uint64_t seed) {
  if (count < 1) throw ConfigError("draw_uniform_points: count must be >= 1");
  if (lo.size() != hi.size()) throw ConfigError("draw_uniform_points: bound dimension mismatch");
  Matrix pts(count, lo.size());
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    for (Index d = 0; d < lo.size(); ++d) {
      pts(i, d) = lo(d) + (hi(d) - lo(d)) * detail::uniform01(rng);
    }
  }
  return pts;
}

} // namespace rbuq
