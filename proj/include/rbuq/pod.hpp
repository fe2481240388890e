#pragma once

#include <memory>
#include <string>
#include <utility>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "rbuq/types.hpp"

namespace rbuq {

/// Symmetric positive definite weighting S exposed through a factor F with
/// S = F^T F, as needed by the weighted POD (Cholesky factor, a diagonal
/// square root, or a block-repeated factor for Kronecker weights I (x) S).
class SpdFactor {
public:
  virtual ~SpdFactor() = default;
  virtual Index dim() const = 0;
  /// F * X
  virtual Matrix apply(const Matrix& X) const = 0;
  /// F^{-1} * X
  virtual Matrix solve(const Matrix& X) const = 0;
  /// X * F^T (column-space application; diagonal factors override cheaply)
  virtual Matrix apply_right_transposed(const Matrix& X) const {
    return apply(X.transpose()).transpose();
  }
  /// Reconstructs S = F^T F (test/diagnostic use).
  Matrix reconstruct() const {
    const Matrix F = apply(Matrix::Identity(dim(), dim()));
    return F.transpose() * F;
  }
};

class IdentityFactor final : public SpdFactor {
public:
  explicit IdentityFactor(Index n) : n_(n) {}
  Index dim() const override { return n_; }
  Matrix apply(const Matrix& X) const override { return X; }
  Matrix solve(const Matrix& X) const override { return X; }
  Matrix apply_right_transposed(const Matrix& X) const override { return X; }

private:
  Index n_;
};

/// Diagonal weight S = diag(w), factor F = diag(sqrt(w)).
class DiagonalFactor final : public SpdFactor {
public:
  explicit DiagonalFactor(Vector weights) : sqrt_w_(weights.cwiseSqrt()) {
    if ((weights.array() <= 0.0).any())
      throw ConfigError("DiagonalFactor: weights must be positive");
  }
  static DiagonalFactor uniform(Index n, double w) {
    return DiagonalFactor(Vector::Constant(n, w));
  }
  Index dim() const override { return sqrt_w_.size(); }
  Matrix apply(const Matrix& X) const override { return sqrt_w_.asDiagonal() * X; }
  Matrix solve(const Matrix& X) const override { return sqrt_w_.cwiseInverse().asDiagonal() * X; }
  Matrix apply_right_transposed(const Matrix& X) const override {
    return X * sqrt_w_.asDiagonal();
  }

private:
  Vector sqrt_w_;
};

/// Sparse SPD weight via Cholesky: with P S P^T = L L^T the factor is
/// F = L^T P, so that S = F^T F.
class SparseCholFactor final : public SpdFactor {
public:
  explicit SparseCholFactor(const SpMat& S) : llt_(std::make_shared<Eigen::SimplicialLLT<SpMat>>()) {
    llt_->compute(S);
    if (llt_->info() != Eigen::Success)
      throw ConfigError("SparseCholFactor: weighting matrix is not positive definite");
    n_ = S.rows();
  }
  Index dim() const override { return n_; }
  Matrix apply(const Matrix& X) const override {
    return llt_->matrixU() * (llt_->permutationP() * X);
  }
  Matrix solve(const Matrix& X) const override {
    Matrix Z = llt_->matrixU().solve(X);
    return llt_->permutationPinv() * Z;
  }

private:
  std::shared_ptr<Eigen::SimplicialLLT<SpMat>> llt_;
  Index n_;
};

/// Kronecker weight I_blocks (x) S applied block-row-wise.
class BlockRepeatFactor final : public SpdFactor {
public:
  BlockRepeatFactor(std::shared_ptr<const SpdFactor> inner, Index blocks)
      : inner_(std::move(inner)), blocks_(blocks) {}
  Index dim() const override { return inner_->dim() * blocks_; }
  Matrix apply(const Matrix& X) const override { return blockwise(X, true); }
  Matrix solve(const Matrix& X) const override { return blockwise(X, false); }

private:
  Matrix blockwise(const Matrix& X, bool forward) const {
    const Index n = inner_->dim();
    Matrix Y(X.rows(), X.cols());
    for (Index b = 0; b < blocks_; ++b) {
      const auto Xb = X.middleRows(b * n, n);
      Y.middleRows(b * n, n) = forward ? inner_->apply(Xb) : inner_->solve(Xb);
    }
    return Y;
  }
  std::shared_ptr<const SpdFactor> inner_;
  Index blocks_;
};

/// POD basis: S-orthonormal columns with non-increasing singular values.
struct PodBasis {
  Matrix Phi;             // M x R_retained
  Vector singular_values; // length min(M,N), non-increasing
  std::string gram_ref;   // identifier of the S weighting used

  Index rank_retained() const { return Phi.cols(); }

  /// Numerical rank with respect to a relative singular value cutoff.
  Index numerical_rank(double rel_tol = 1e-13) const {
    if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
    const double cut = singular_values(0) * rel_tol;
    Index r = 0;
    while (r < singular_values.size() && singular_values(r) > cut) ++r;
    return r;
  }
};

/// Weighted POD of a snapshot matrix: Cholesky-factor the weights,
/// take the SVD of F_S U F_W^T, and map the left singular vectors back
/// through F_S. Retains min(M,N) basis vectors (economy size); column signs
/// are fixed so the largest-magnitude entry of each basis vector is positive.
inline PodBasis compute_pod(const Matrix& U, const SpdFactor& S, const SpdFactor& W,
                            std::string gram_ref = std::string()) {
  if (S.dim() != U.rows() || W.dim() != U.cols())
    throw ConfigError("compute_pod: weighting dimensions do not match the snapshot matrix");

  Matrix B = W.apply_right_transposed(S.apply(U));
  Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeThinU);

  PodBasis basis;
  basis.gram_ref = std::move(gram_ref);
  basis.singular_values = svd.singularValues();
  basis.Phi = S.solve(svd.matrixU());
  for (Index c = 0; c < basis.Phi.cols(); ++c) {
    Index imax = 0;
    basis.Phi.col(c).cwiseAbs().maxCoeff(&imax);
    if (basis.Phi(imax, c) < 0.0) basis.Phi.col(c) = -basis.Phi.col(c);
  }
  return basis;
}

/// Value of the discrete POD objective (weighted mean-square S-norm
/// projection error over the snapshots) for every truncation rank
/// R = 0..R_retained, computed by deflating the weighted snapshot matrix one
/// basis vector at a time. Entry [R] corresponds to rank R.
inline Vector projection_errors(const Matrix& U, const SpdFactor& S, const SpdFactor& W,
                                const PodBasis& basis) {
  Matrix B = W.apply_right_transposed(S.apply(U));
  const Matrix Q = S.apply(basis.Phi);
  const Index R = Q.cols();
  Vector err(R + 1);
  err(0) = B.squaredNorm();
  for (Index r = 0; r < R; ++r) {
    B.noalias() -= Q.col(r) * (Q.col(r).transpose() * B);
    err(r + 1) = B.squaredNorm();
  }
  return err;
}

/// POD objective for a single truncation rank R (0 = trivial space).
inline double projection_error(const Matrix& U, const SpdFactor& S, const SpdFactor& W,
                               const PodBasis& basis, Index R) {
  if (R < 0 || R > basis.rank_retained())
    throw ConfigError("projection_error: rank out of range");
  Matrix B = W.apply_right_transposed(S.apply(U));
  if (R > 0) {
    const Matrix Q = S.apply(basis.Phi.leftCols(R));
    B.noalias() -= Q * (Q.transpose() * B);
  }
  return B.squaredNorm();
}

} // namespace rbuq
