#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rbuq/types.hpp"

namespace rbuq {

/// One eigenpair of the 1D exponential covariance exp(-|s-t|/L) on (-1/2,1/2).
///
/// Even modes: cos(omega*s)/norm, with omega solving 1/L = omega*tan(omega/2).
/// Odd modes:  sin(omega*s)/norm, with omega solving omega = -(1/L)*tan(omega/2).
/// Both give lambda_1d = 2c/(omega^2 + c^2), c = 1/L. The sign convention
/// (cosine positive at 0, sine with positive slope at 0) is built into the
/// closed forms.
struct Kl1dMode {
  enum class Parity { even, odd };
  double omega = 0.0;
  double lambda_1d = 0.0;
  Parity parity = Parity::even;
  double norm_const = 1.0;

  double eval(double s) const {
    return (parity == Parity::even ? std::cos(omega * s) : std::sin(omega * s)) / norm_const;
  }
};

/// Truncated 2D Karhunen-Loeve expansion of the separable exponential
/// covariance. Each retained mode is a tensor product of two 1D modes;
/// eigenvalues are sorted non-increasingly with lexicographic tie-breaking.
struct KlExpansion {
  struct Mode2d {
    int i = 0; // 1-based index into modes_1d for the x1 factor
    int j = 0; // 1-based index into modes_1d for the x2 factor
    double lambda = 0.0;
  };

  std::vector<Kl1dMode> modes_1d;
  std::vector<Mode2d> modes_2d;
  double correlation_length = 1.0;
  int num_modes = 0; // K

  double eigenfunction(int k, double x1, double x2) const {
    const Mode2d& m = modes_2d[static_cast<std::size_t>(k)];
    return modes_1d[static_cast<std::size_t>(m.i - 1)].eval(x1) *
           modes_1d[static_cast<std::size_t>(m.j - 1)].eval(x2);
  }

  double lambda(int k) const { return modes_2d[static_cast<std::size_t>(k)].lambda; }
  double sqrt_lambda(int k) const { return std::sqrt(lambda(k)); }
};

namespace detail {

// Bisection on [lo,hi] assuming a sign change; runs until the interval
// collapses in floating point.
template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace detail

/// Solves the transcendental eigenvalue problem of the 1D exponential
/// covariance analytically (root isolation per tangent branch + bisection)
/// and returns the `count` largest eigenpairs, even/odd parities alternating.
inline std::vector<Kl1dMode> solve_covariance_eigenpairs_1d(double L, int count) {
  if (count < 1) throw ConfigError("solve_covariance_eigenpairs_1d: count must be >= 1");
  if (!(L > 0)) throw ConfigError("solve_covariance_eigenpairs_1d: L must be positive");

  const double a = 0.5;
  const double c = 1.0 / L;
  const double pi = std::acos(-1.0);
  const double eps = 1e-9;

  std::vector<Kl1dMode> modes;
  modes.reserve(static_cast<std::size_t>(count));

  // Mode k (1-based): branch m = (k+1)/2; even for odd k, odd for even k.
  // Even root m lies in ((m-1)pi, (m-1/2)pi)/a, odd root m in ((m-1/2)pi, m*pi)/a,
  // so roots are generated in increasing omega (decreasing lambda) order.
  for (int k = 1; k <= count; ++k) {
    const int m = (k + 1) / 2;
    const bool even = (k % 2 == 1);
    Kl1dMode mode;
    mode.parity = even ? Kl1dMode::Parity::even : Kl1dMode::Parity::odd;

    // bisect the pole-free product forms, equivalent to the tan forms on the
    // open branch intervals:
    //   even: c cos(wa) - w sin(wa) = 0   <=>  c = w tan(wa)
    //   odd:  w cos(wa) + c sin(wa) = 0   <=>  w = -c tan(wa)
    double lo, hi, residual;
    if (even) {
      lo = ((m - 1) * pi + eps) / a;
      hi = ((m - 0.5) * pi - eps) / a;
      auto f = [&](double w) { return c * std::cos(w * a) - w * std::sin(w * a); };
      mode.omega = detail::bisect(f, lo, hi);
      residual = f(mode.omega);
    } else {
      lo = ((m - 0.5) * pi + eps) / a;
      hi = (m * pi - eps) / a;
      auto f = [&](double w) { return w * std::cos(w * a) + c * std::sin(w * a); };
      mode.omega = detail::bisect(f, lo, hi);
      residual = f(mode.omega);
    }
    if (!(std::abs(residual) <= 1e-12 * std::max(1.0, c + mode.omega))) {
      throw SolverError("KL root refinement failed on branch " + std::to_string(m) +
                        (even ? " (even)" : " (odd)") + ", residual " + std::to_string(residual));
    }

    mode.lambda_1d = 2.0 * c / (mode.omega * mode.omega + c * c);
    const double s2 = std::sin(2.0 * mode.omega * a) / (2.0 * mode.omega);
    mode.norm_const = even ? std::sqrt(a + s2) : std::sqrt(a - s2);
    modes.push_back(mode);
  }
  return modes;
}

/// Builds the truncated 2D KL expansion with the K largest tensor-product
/// eigenvalues of the separable kernel.
inline KlExpansion build_kl_2d(double L, int K) {
  if (K < 1) throw ConfigError("build_kl_2d: K must be >= 1");

  KlExpansion kl;
  kl.correlation_length = L;
  kl.num_modes = K;
  const int m1d = K + 2;
  kl.modes_1d = solve_covariance_eigenpairs_1d(L, m1d);

  std::vector<KlExpansion::Mode2d> all;
  all.reserve(static_cast<std::size_t>(m1d) * m1d);
  for (int i = 1; i <= m1d; ++i) {
    for (int j = 1; j <= m1d; ++j) {
      all.push_back({i, j, kl.modes_1d[i - 1].lambda_1d * kl.modes_1d[j - 1].lambda_1d});
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  all.resize(static_cast<std::size_t>(K));
  kl.modes_2d = std::move(all);
  return kl;
}

/// Pointwise value of the truncated random field kappa(x;y).
inline double evaluate_kl_field(const KlExpansion& kl, double kappa0, double sigma, double x1,
                                double x2, const Vector& y) {
  double value = kappa0;
  for (int k = 0; k < kl.num_modes; ++k) {
    value += sigma * kl.sqrt_lambda(k) * kl.eigenfunction(k, x1, x2) * y(k);
  }
  return value;
}

} // namespace rbuq
