#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Eigenvalues>

#include "rbuq/sampling.hpp"
#include "rbuq/types.hpp"

namespace rbuq {

/// Tensorized double-orthogonal polynomial basis of the stochastic space.
///
/// Univariate construction: normalized Legendre polynomials on
/// [-sqrt(3),sqrt(3)] are rotated by the eigenvectors Q of the tridiagonal
/// multiplication-by-y matrix, so that the rotated basis is orthonormal under
/// the uniform density and simultaneously diagonalizes multiplication by y.
/// diag_values holds the multiplication eigenvalues (the order-(d+1)
/// Gauss-Legendre nodes scaled by sqrt(3)), expectation_weights the first
/// row of Q (e_m = E[psi_m] > 0 by sign convention). The tensor basis over K
/// dimensions is enumerated by multi-indices in {0..d}^K, last dimension
/// fastest.
struct DoubleOrthogonalBasis {
  int degree = 0; // d
  int K = 0;
  Matrix Q;                   // (d+1) x (d+1) orthogonal rotation
  Vector diag_values;         // length d+1
  Vector expectation_weights; // length d+1
  Eigen::MatrixXi modes;      // M_SG x K multi-indices
  int M_SG = 0;

  const Eigen::MatrixXi::ConstRowXpr multi_index(int m) const { return modes.row(m); }
};

inline DoubleOrthogonalBasis build_double_orthogonal_basis(int d, int K) {
  if (d < 0) throw ConfigError("build_double_orthogonal_basis: degree must be >= 0");
  if (K < 1) throw ConfigError("build_double_orthogonal_basis: K must be >= 1");

  DoubleOrthogonalBasis basis;
  basis.degree = d;
  basis.K = K;

  const int n = d + 1;
  // multiplication operator in the orthonormal Legendre basis on [-s3,s3]:
  // symmetric tridiagonal with off-diagonals sqrt(3)(k+1)/sqrt((2k+1)(2k+3))
  Matrix Y = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    const double b = kSqrt3 * (k + 1) / std::sqrt(double(2 * k + 1) * double(2 * k + 3));
    Y(k, k + 1) = b;
    Y(k + 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Y);
  if (es.info() != Eigen::Success)
    throw SolverError("build_double_orthogonal_basis: eigendecomposition failed");
  basis.diag_values = es.eigenvalues();
  basis.Q = es.eigenvectors();
  for (int m = 0; m < n; ++m) {
    double pivot = basis.Q(0, m);
    if (std::abs(pivot) < 1e-14) {
      Index imax = 0;
      basis.Q.col(m).cwiseAbs().maxCoeff(&imax);
      pivot = basis.Q(imax, m);
    }
    if (pivot < 0.0) basis.Q.col(m) = -basis.Q.col(m);
  }
  basis.expectation_weights = basis.Q.row(0).transpose();

  std::int64_t m_sg = 1;
  for (int k = 0; k < K; ++k) {
    m_sg *= n;
    if (m_sg > (std::int64_t(1) << 26))
      throw ConfigError("build_double_orthogonal_basis: (d+1)^K too large");
  }
  basis.M_SG = static_cast<int>(m_sg);
  basis.modes.resize(basis.M_SG, K);
  for (int m = 0; m < basis.M_SG; ++m) {
    int rem = m;
    for (int k = K - 1; k >= 0; --k) {
      basis.modes(m, k) = rem % n;
      rem /= n;
    }
  }
  return basis;
}

/// Per-dimension multiplication eigenvalues d_k^(m) entering SG block m.
inline Vector sg_mode_reaction_coefficients(const DoubleOrthogonalBasis& basis, int mode) {
  if (mode < 0 || mode >= basis.M_SG)
    throw ConfigError("sg_mode_reaction_coefficients: mode index out of range");
  Vector d(basis.K);
  for (int k = 0; k < basis.K; ++k) d(k) = basis.diag_values(basis.modes(mode, k));
  return d;
}

/// Expectations E_j = E[psi_j] of the tensor basis functions; the squared
/// entries sum to one (expansion of the constant 1).
inline Vector sg_expectation_vector(const DoubleOrthogonalBasis& basis) {
  Vector E(basis.M_SG);
  for (int m = 0; m < basis.M_SG; ++m) {
    double prod = 1.0;
    for (int k = 0; k < basis.K; ++k) prod *= basis.expectation_weights(basis.modes(m, k));
    E(m) = prod;
  }
  return E;
}

/// Evaluates the univariate double-orthogonal polynomial psi_m at y
/// (three-term Legendre recurrence plus rotation); used by cross-validation
/// tests that sample the SG expansion pointwise.
inline double evaluate_double_orthogonal_1d(const DoubleOrthogonalBasis& basis, int m, double y) {
  const int n = basis.degree + 1;
  // normalized Legendre on [-s3,s3] under the uniform density:
  // p_0 = 1, y p_k = b_{k+1} p_{k+1} + b_k p_{k-1}
  Vector p(n);
  p(0) = 1.0;
  if (n > 1) {
    auto b = [](int k) {
      return kSqrt3 * k / std::sqrt(double(2 * k - 1) * double(2 * k + 1));
    };
    p(1) = y / b(1);
    for (int k = 1; k + 1 < n; ++k) p(k + 1) = (y * p(k) - b(k) * p(k - 1)) / b(k + 1);
  }
  return p.dot(basis.Q.col(m));
}

/// Evaluates the tensor basis function psi_j(y) for multi-index row j.
inline double evaluate_double_orthogonal(const DoubleOrthogonalBasis& basis, int j,
                                         const Vector& y) {
  double prod = 1.0;
  for (int k = 0; k < basis.K; ++k) {
    prod *= evaluate_double_orthogonal_1d(basis, basis.modes(j, k), y(k));
  }
  return prod;
}

} // namespace rbuq
