#pragma once

#include <array>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rbuq/types.hpp"

namespace testing_helpers {

/// Tabulated Gauss-Legendre rules on [-1,1] (Abramowitz & Stegun), used as an
/// implementation-independent quadrature oracle.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  switch (n) {
    case 1:
      return {{0.0}, {2.0}};
    case 2:
      return {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}};
    case 3:
      return {{-0.7745966692414834, 0.0, 0.7745966692414834},
              {0.5555555555555556, 0.8888888888888888, 0.5555555555555556}};
    case 4:
      return {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
              {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}};
    case 5:
      return {{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                0.9061798459386640},
              {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
               0.2369268850561891}};
    case 6:
      return {{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                0.2386191860831969, 0.6612093864662645, 0.9324695142031521},
              {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0.4679139345726910,
               0.3607615730481386, 0.1713244923791704}};
    default:
      throw std::runtime_error("gauss_legendre: order not tabulated");
  }
}

/// Integral of f over [a,b] by a composite tabulated Gauss rule.
template <class F>
double integrate(F f, double a, double b, int subdivisions = 200, int order = 5) {
  const GaussRule rule = gauss_legendre(order);
  const double h = (b - a) / subdivisions;
  double total = 0.0;
  for (int s = 0; s < subdivisions; ++s) {
    const double lo = a + s * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      total += 0.5 * h * rule.weights[q] * f(lo + 0.5 * h * (rule.nodes[q] + 1.0));
    }
  }
  return total;
}

/// Expectation of f(y) for y uniform on [-sqrt(3),sqrt(3)] with an n-point
/// tabulated Gauss rule (exact for polynomials of degree <= 2n-1).
template <class F>
double uniform_expectation(F f, int order) {
  const GaussRule rule = gauss_legendre(order);
  const double s3 = std::sqrt(3.0);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    total += 0.5 * rule.weights[q] * f(s3 * rule.nodes[q]);
  }
  return total;
}

/// Largest principal angle (radians) between the column spans of A and B
/// (columns need not be orthonormal). Uses the sine-based formula, which is
/// accurate for small angles.
inline double max_principal_angle(const rbuq::Matrix& A, const rbuq::Matrix& B) {
  Eigen::HouseholderQR<rbuq::Matrix> qa(A), qb(B);
  rbuq::Matrix Qa = qa.householderQ() * rbuq::Matrix::Identity(A.rows(), A.cols());
  rbuq::Matrix Qb = qb.householderQ() * rbuq::Matrix::Identity(B.rows(), B.cols());
  const rbuq::Matrix resid = Qa - Qb * (Qb.transpose() * Qa);
  Eigen::BDCSVD<rbuq::Matrix> svd(resid);
  return std::asin(std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0));
}

inline rbuq::Matrix random_spd(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  rbuq::Matrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
  return A * A.transpose() + n * rbuq::Matrix::Identity(n, n);
}

inline rbuq::SpMat to_sparse(const rbuq::Matrix& A) {
  rbuq::SpMat S = A.sparseView();
  S.makeCompressed();
  return S;
}

} // namespace testing_helpers
