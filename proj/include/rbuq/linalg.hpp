#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "rbuq/types.hpp"

namespace rbuq {

/// Sparse direct LU with symbolic/numeric split so that families of matrices
/// sharing one sparsity pattern are refactorized cheaply.
class SparseSolver {
public:
  SparseSolver() = default;
  explicit SparseSolver(const SpMat& A) {
    analyze(A);
    factorize(A);
  }

  void analyze(const SpMat& A) {
    lu_.analyzePattern(A);
    analyzed_ = true;
  }

  void factorize(const SpMat& A) {
    if (!analyzed_) analyze(A);
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) {
      throw SolverError("SparseSolver: LU factorization failed (matrix singular or structurally deficient)");
    }
  }

  Vector solve(const Vector& b) const { return lu_.solve(b); }
  Matrix solve(const Matrix& b) const { return lu_.solve(b); }
  Vector solve_transposed(const Vector& b) const { return lu_.transpose().solve(b); }
  Matrix solve_transposed(const Matrix& b) const { return lu_.transpose().solve(b); }

private:
  // Eigen's transpose view is a non-const accessor on an otherwise
  // read-only factorization
  mutable Eigen::SparseLU<SpMat> lu_;
  bool analyzed_ = false;
};

/// One-shot sparse direct solve. The residual contract
/// |Ax-b| <= 1e-10 (|A|_F |x| + |b|) is verified by the test suite.
inline Vector sparse_solve(const SpMat& A, const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw ConfigError("sparse_solve: dimension mismatch");
  return SparseSolver(A).solve(b);
}

inline Matrix sparse_solve(const SpMat& A, const Matrix& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows())
    throw ConfigError("sparse_solve: dimension mismatch");
  return SparseSolver(A).solve(B);
}

/// Riesz representation context for a Gram matrix G: dual norms
/// |F|_{X'} = sqrt(F^T G^{-1} F), with a cached Cholesky factorization.
/// The blocked variant treats a long vector as stacked blocks of dim(G)
/// entries and uses the Gram I (x) G (orthonormal stochastic basis).
class RieszContext {
public:
  explicit RieszContext(SpMat gram) : gram_(std::move(gram)) {
    llt_.compute(gram_);
    if (llt_.info() != Eigen::Success)
      throw SolverError("RieszContext: Gram matrix is not positive definite");
  }

  const SpMat& gram() const { return gram_; }

  Vector representer(const Vector& F) const { return llt_.solve(F); }

  double dual_norm_sq(const Vector& F) const {
    if (F.size() != gram_.rows()) throw ConfigError("RieszContext: dimension mismatch");
    return std::max(0.0, F.dot(llt_.solve(F)));
  }

  double dual_norm(const Vector& F) const { return std::sqrt(dual_norm_sq(F)); }

  double dual_norm_sq_blocked(const Vector& F) const {
    const Index n = gram_.rows();
    if (F.size() % n != 0) throw ConfigError("RieszContext: blocked dimension mismatch");
    const Index blocks = F.size() / n;
    Eigen::Map<const Matrix> Fm(F.data(), n, blocks);
    const Matrix Z = llt_.solve(Fm);
    return std::max(0.0, (Fm.array() * Z.array()).sum());
  }

  double dual_norm_blocked(const Vector& F) const { return std::sqrt(dual_norm_sq_blocked(F)); }

  /// Primal norm sqrt(z^T G z) of a coefficient vector.
  double norm(const Vector& z) const { return std::sqrt(std::max(0.0, z.dot(gram_ * z))); }

private:
  SpMat gram_;
  Eigen::SimplicialLLT<SpMat> llt_;
};

namespace detail {

// Number of eigenvalues of the pencil (A,B) strictly below the shift s,
// via the inertia of A - s B. Nudges the shift when it hits the spectrum.
inline Index eigenvalue_count_below(const SpMat& A, const SpMat& B, double& s, double scale) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    SpMat C = A - s * B;
    Eigen::SimplicialLDLT<SpMat> ldlt(C);
    if (ldlt.info() == Eigen::Success) {
      const Vector d = ldlt.vectorD();
      if (d.allFinite() && d.cwiseAbs().minCoeff() > 1e-14 * scale) {
        return (d.array() < 0.0).count();
      }
    }
    s += (1e-10 + std::abs(s) * 1e-12); // shift sits on (or too close to) an eigenvalue
  }
  throw SolverError("eigenvalue_count_below: inertia computation failed near shift " +
                    std::to_string(s));
}

} // namespace detail

/// Smallest eigenvalue of the symmetric generalized problem A v = lambda B v
/// with B SPD. The eigenvalue is first bracketed to 1e-9 relative accuracy by
/// inertia bisection on the shifted pencil, then a shifted inverse iteration
/// from just below the bracket yields the eigenvector; the returned value is
/// its Rayleigh quotient.
inline double smallest_generalized_eigenvalue(const SpMat& A_sym, const SpMat& B,
                                              double rel_tol = 1e-9, int max_iter = 200) {
  if (A_sym.rows() != A_sym.cols() || B.rows() != B.cols() || A_sym.rows() != B.rows())
    throw ConfigError("smallest_generalized_eigenvalue: dimension mismatch");
  const Index n = A_sym.rows();
  const double scale = std::max(1.0, A_sym.coeffs().abs().maxCoeff());

  Eigen::SimplicialLLT<SpMat> bllt(B);
  if (bllt.info() != Eigen::Success)
    throw SolverError("smallest_generalized_eigenvalue: B is not positive definite");

  // initial upper bound: Rayleigh quotient of a deterministic start vector
  Vector x = Vector::Ones(n);
  x /= std::sqrt(x.dot(B * x));
  double ub = x.dot(A_sym * x);

  // expand downwards until at least one eigenvalue lies below lb
  double lb = ub;
  double step = std::max(1.0, std::abs(ub));
  int guard = 0;
  while (true) {
    double probe = lb - step;
    if (detail::eigenvalue_count_below(A_sym, B, probe, scale) == 0) {
      lb = probe;
      break;
    }
    lb = probe;
    step *= 2.0;
    if (++guard > 200) throw SolverError("smallest_generalized_eigenvalue: bracketing failed");
  }

  // inertia bisection: maintain count(lb)=0 <= count(ub)>=... narrow to rel_tol
  for (int it = 0; it < max_iter && (ub - lb) > rel_tol * std::max(1.0, std::abs(ub)); ++it) {
    double mid = 0.5 * (lb + ub);
    if (detail::eigenvalue_count_below(A_sym, B, mid, scale) == 0)
      lb = mid;
    else
      ub = mid;
  }

  // shifted inverse iteration from just below the certified bracket
  const double lo = std::min(lb, ub);
  const double width = std::max(ub - lb, 0.0);
  const double shift = lo - 10.0 * width - 1e-12 * std::max(1.0, std::abs(lo));
  SpMat C = A_sym - shift * B;
  Eigen::SimplicialLDLT<SpMat> ldlt(C);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("smallest_generalized_eigenvalue: shifted factorization failed");
  double rho_prev = std::numeric_limits<double>::infinity();
  double rho = ub;
  for (int it = 0; it < max_iter; ++it) {
    Vector z = ldlt.solve(B * x);
    const double nz = std::sqrt(z.dot(B * z));
    if (!(nz > 0.0) || !z.allFinite())
      throw SolverError("smallest_generalized_eigenvalue: inverse iteration broke down");
    x = z / nz;
    rho = x.dot(A_sym * x);
    if (std::abs(rho - rho_prev) <= 1e-10 * std::max(1.0, std::abs(rho))) return rho;
    rho_prev = rho;
  }
  throw SolverError("smallest_generalized_eigenvalue: no convergence after " +
                    std::to_string(max_iter) + " iterations");
}

} // namespace rbuq
