#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "rbuq/assembly.hpp"
#include "rbuq/linalg.hpp"
#include "test_helpers.hpp"

using namespace rbuq;
namespace th = testing_helpers;

TEST_CASE("sparse solve basics", "[linalg]") {
  SpMat I(3, 3);
  I.setIdentity();
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  REQUIRE((sparse_solve(I, b) - b).norm() == 0.0);

  Matrix Dd = Matrix::Zero(2, 2);
  Dd(0, 0) = 2.0;
  Dd(1, 1) = 4.0;
  Vector b2(2);
  b2 << 2.0, 8.0;
  const Vector x = sparse_solve(th::to_sparse(Dd), b2);
  REQUIRE_THAT(x(0), Catch::Matchers::WithinRel(1.0, 1e-14));
  REQUIRE_THAT(x(1), Catch::Matchers::WithinRel(2.0, 1e-14));
}

TEST_CASE("sparse solve residual contract on random SPD systems", "[linalg]") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Matrix A = th::random_spd(50, seed);
    const SpMat As = th::to_sparse(A);
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> g;
    Vector b(50);
    for (int i = 0; i < 50; ++i) b(i) = g(rng);

    const Vector x = sparse_solve(As, b);
    const double resid = (A * x - b).norm();
    REQUIRE(resid <= 1e-10 * (A.norm() * x.norm() + b.norm()));
  }
}

TEST_CASE("sparse solver reports singular matrices", "[linalg]") {
  Matrix S = Matrix::Zero(3, 3);
  S(0, 0) = 1.0;
  S(1, 1) = 1.0; // third row/col zero
  SpMat sp = th::to_sparse(S);
  sp.conservativeResize(3, 3);
  REQUIRE_THROWS_AS(SparseSolver(sp), SolverError);
}

TEST_CASE("transpose solve matches the transposed operator", "[linalg]") {
  Matrix A = th::random_spd(20, 9u);
  A(3, 7) += 5.0; // break symmetry
  const SpMat As = th::to_sparse(A);
  const SparseSolver lu(As);
  Vector b = Vector::LinSpaced(20, -1.0, 1.0);
  const Vector x = lu.solve_transposed(b);
  REQUIRE((A.transpose() * x - b).norm() <= 1e-10 * (A.norm() * x.norm() + b.norm()));
}

TEST_CASE("riesz dual norm", "[linalg]") {
  SpMat I(2, 2);
  I.setIdentity();
  const RieszContext euclid(I);
  Vector F(2);
  F << 3.0, 4.0;
  REQUIRE_THAT(euclid.dual_norm(F), Catch::Matchers::WithinRel(5.0, 1e-14));
  REQUIRE(euclid.dual_norm(Vector::Zero(2)) == 0.0);

  // duality: |G z|_{X'} = sqrt(z^T G z)
  const Matrix G = th::random_spd(12, 4u);
  const RieszContext ctx(th::to_sparse(G));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Vector z(12);
  for (int i = 0; i < 12; ++i) z(i) = g(rng);
  REQUIRE_THAT(ctx.dual_norm(G * z), Catch::Matchers::WithinRel(std::sqrt(z.dot(G * z)), 1e-10));
}

TEST_CASE("riesz dual norm is the supremum over unit vectors", "[linalg]") {
  const Matrix G = th::random_spd(3, 21u);
  const RieszContext ctx(th::to_sparse(G));
  Vector F(3);
  F << 0.7, -1.3, 0.4;
  const double claimed = ctx.dual_norm(F);

  // direct maximization oracle: dense sampling plus the known maximizer
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  double best = 0.0;
  for (int trial = 0; trial < 20000; ++trial) {
    Vector v(3);
    for (int i = 0; i < 3; ++i) v(i) = g(rng);
    best = std::max(best, std::abs(F.dot(v)) / std::sqrt(v.dot(G * v)));
  }
  REQUIRE(best <= claimed * (1.0 + 1e-12));
  REQUIRE(best >= claimed * (1.0 - 1e-3));

  const Vector vstar = ctx.representer(F);
  REQUIRE_THAT(std::abs(F.dot(vstar)) / std::sqrt(vstar.dot(G * vstar)),
               Catch::Matchers::WithinRel(claimed, 1e-12));
}

TEST_CASE("blocked dual norm equals the Kronecker Gram dual norm", "[linalg]") {
  const Matrix G = th::random_spd(4, 31u);
  const RieszContext ctx(th::to_sparse(G));
  Vector F(12);
  for (int i = 0; i < 12; ++i) F(i) = std::sin(1.0 + i);

  double direct = 0.0;
  for (int b = 0; b < 3; ++b) {
    const Vector Fb = F.segment(4 * b, 4);
    direct += ctx.dual_norm_sq(Fb);
  }
  REQUIRE_THAT(ctx.dual_norm_sq_blocked(F), Catch::Matchers::WithinRel(direct, 1e-12));
}

TEST_CASE("smallest generalized eigenvalue on canonical pencils", "[linalg]") {
  SpMat I3(3, 3);
  I3.setIdentity();
  REQUIRE_THAT(smallest_generalized_eigenvalue(I3, I3), Catch::Matchers::WithinAbs(1.0, 1e-9));

  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 5.0;
  SpMat I2(2, 2);
  I2.setIdentity();
  REQUIRE_THAT(smallest_generalized_eigenvalue(th::to_sparse(D), I2),
               Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("smallest generalized eigenvalue matches a dense oracle", "[linalg]") {
  for (unsigned seed : {3u, 17u}) {
    const Matrix A = th::random_spd(30, seed);
    const Matrix B = th::random_spd(30, seed + 50);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> dense(A, B);
    const double oracle = dense.eigenvalues().minCoeff();
    const double computed = smallest_generalized_eigenvalue(th::to_sparse(A), th::to_sparse(B));
    REQUIRE_THAT(computed, Catch::Matchers::WithinRel(oracle, 1e-8));
  }
}

TEST_CASE("gram/mass pencil reproduces the Dirichlet Laplace eigenvalue", "[linalg]") {
  const Triangulation mesh = build_mesh(8);
  const KlExpansion kl = build_kl_2d(1.0, 1);
  const AffineOperatorSet ops = assemble_operators(mesh, kl, -1.0, 0.0);

  const double lam = smallest_generalized_eigenvalue(ops.gram_X, ops.mass_L2);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> dense(Matrix(ops.gram_X), Matrix(ops.mass_L2));
  REQUIRE_THAT(lam, Catch::Matchers::WithinRel(dense.eigenvalues().minCoeff(), 1e-8));

  // continuum value 1 + 2 pi^2; the discrete value sits slightly above
  const double continuum = 1.0 + 2.0 * M_PI * M_PI;
  REQUIRE(lam >= continuum);
  REQUIRE(lam <= continuum * 1.15);
}
