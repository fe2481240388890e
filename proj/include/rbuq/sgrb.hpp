#pragma once

#include <array>
#include <cmath>
#include <iostream>
#include <optional>
#include <vector>

#include "rbuq/assembly.hpp"
#include "rbuq/linalg.hpp"
#include "rbuq/mcrb.hpp" // McEstimate, mc_estimators
#include "rbuq/pod.hpp"
#include "rbuq/stochastic_basis.hpp"

namespace rbuq {

/// Stochastic Galerkin system in the double-orthogonal tensor basis: the
/// coupled spatial-stochastic operator decouples into M_SG independent
/// spatial blocks
///   A_m(mu) = A0 + sum_k d_k^(m) Ay[k] + sum_p mu_p Amu[p],
/// with per-mode loads f_m = E_m f and output blocks E_m l. Coefficient
/// vectors over the product space are stored mode-major (block m occupies
/// [m*M_FE, (m+1)*M_FE)) in mode-enumeration order.
struct SgSystem {
  AffineOperatorSet ops;
  DoubleOrthogonalBasis basis;
  Matrix mode_coeffs; // M_SG x K, row m = reaction coefficients of block m
  Vector E;           // expectation weights E_m, length M_SG
  int M_FE = 0;
  int M_SG = 0;

  Index total_dim() const { return static_cast<Index>(M_FE) * M_SG; }

  Vector f_bar() const {
    Vector f(total_dim());
    for (int m = 0; m < M_SG; ++m) f.segment(static_cast<Index>(m) * M_FE, M_FE) = E(m) * ops.f_vec;
    return f;
  }

  Vector l_bar() const {
    Vector l(total_dim());
    for (int m = 0; m < M_SG; ++m) l.segment(static_cast<Index>(m) * M_FE, M_FE) = E(m) * ops.l_vec;
    return l;
  }

  /// A(mu) w (or its transpose) applied blockwise.
  Vector apply(const Eigen::Vector2d& mu, const Vector& w, bool transposed = false) const {
    Vector out(total_dim());
    SpMat A = ops.A0;
    for (int m = 0; m < M_SG; ++m) {
      ops.combine_into(A, mode_coeffs.row(m).transpose(), mu);
      const auto wm = w.segment(static_cast<Index>(m) * M_FE, M_FE);
      if (transposed)
        out.segment(static_cast<Index>(m) * M_FE, M_FE) = A.transpose() * wm;
      else
        out.segment(static_cast<Index>(m) * M_FE, M_FE) = A * wm;
    }
    return out;
  }

  /// Per-mode outputs o_m = l^T w_m of a product-space coefficient vector.
  Vector mode_outputs(const Vector& w) const {
    Vector o(M_SG);
    for (int m = 0; m < M_SG; ++m)
      o(m) = ops.l_vec.dot(w.segment(static_cast<Index>(m) * M_FE, M_FE));
    return o;
  }
};

inline SgSystem build_sg_system(const AffineOperatorSet& ops, DoubleOrthogonalBasis basis) {
  SgSystem sg;
  sg.ops = ops;
  sg.M_FE = ops.M_FE;
  sg.M_SG = basis.M_SG;
  sg.E = sg_expectation_vector(basis);
  sg.mode_coeffs.resize(basis.M_SG, basis.K);
  for (int m = 0; m < basis.M_SG; ++m)
    sg.mode_coeffs.row(m) = sg_mode_reaction_coefficients(basis, m).transpose();
  sg.basis = std::move(basis);
  return sg;
}

/// Full-order SGFE solve: M_SG independent sparse solves, concatenated in
/// mode-enumeration order. With rhs_blocks given, solves A_m(mu)^T u_m =
/// rhs_m instead (the dual systems).
inline Vector solve_sgfe(const SgSystem& sg, const Eigen::Vector2d& mu) {
  Vector u(sg.total_dim());
  SpMat A = sg.ops.A0;
  SparseSolver solver;
  solver.analyze(A);
  for (int m = 0; m < sg.M_SG; ++m) {
    sg.ops.combine_into(A, sg.mode_coeffs.row(m).transpose(), mu);
    try {
      solver.factorize(A);
    } catch (const SolverError& err) {
      throw SolverError("solve_sgfe: mode " + std::to_string(m) + ": " + err.what());
    }
    u.segment(static_cast<Index>(m) * sg.M_FE, sg.M_FE) = solver.solve((sg.E(m) * sg.ops.f_vec).eval());
  }
  return u;
}

/// Exact mean and variance of the linear output of an SG expansion:
/// mean = sum_m E_m o_m, variance = sum_m o_m^2 - mean^2 (orthonormal basis).
struct SgOutputMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline SgOutputMoments sg_output_moments(const SgSystem& sg, const Vector& u_bar) {
  const Vector o = sg.mode_outputs(u_bar);
  SgOutputMoments mom;
  mom.mean = sg.E.dot(o);
  mom.variance = o.squaredNorm() - mom.mean * mom.mean;
  return mom;
}

/// Coercivity factor of the SG bilinear form: because the X-bar Gram is
/// I (x) gram_X and the operator is block-diagonal, the infimum is the
/// minimum over modes of the per-block coercivity; convection drops out, so
/// the value is mu-independent.
inline double coercivity_factor_sg(const SgSystem& sg,
                                   const Eigen::Vector2d& /*mu*/ = Eigen::Vector2d::Zero()) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int m = 0; m < sg.M_SG; ++m) {
    const SpMat sym = sg.ops.symmetric_part(sg.mode_coeffs.row(m).transpose());
    alpha = std::min(alpha, smallest_generalized_eigenvalue(sym, sg.ops.gram_X));
  }
  if (!(alpha > 0.0)) throw ModelError("coercivity lost in the SG operator");
  return alpha;
}

/// Continuity factor of the output variance form: for a deterministic
/// output functional and an orthonormal stochastic basis the supremum of
/// E[l(w) l(v)] / (|w| |v|) is attained by placing the Riesz representer of
/// l in a single stochastic mode, giving |l|_{X'}^2.
inline double continuity_factor_gamma2(const RieszContext& riesz, const Vector& l_vec) {
  return riesz.dual_norm_sq(l_vec);
}

/// Reduced-order data of the stochastic Galerkin reduced basis model:
/// primal space plus three dual spaces over the product space, reduced
/// affine operators in the three mu-affine terms (block-diagonal reaction
/// part, two convection parts), reduced load/output vectors, per-mode
/// output maps L_(m,r) = l(spatial slice m of basis vector r), and the
/// cross operators V_i^T A_q V used for sampling-free residual corrections.
struct SgrbRom {
  static constexpr int kNumSpaces = 4; // 0 primal, 1..3 duals
  static constexpr int kNumTerms = 3;  // reaction block, convection x, convection y

  std::array<Matrix, kNumSpaces> bases;
  std::array<Vector, kNumSpaces> singular_values;
  std::array<std::array<Matrix, kNumTerms>, kNumSpaces> reduced_ops;
  std::array<Vector, kNumSpaces> reduced_f;
  std::array<Vector, kNumSpaces> reduced_lbar;
  std::array<Matrix, kNumSpaces> mode_output;
  std::array<std::array<Matrix, kNumTerms>, kNumSpaces> cross_ops; // V_i^T A_q V_0 (entry 0: self)
  Matrix train_points;
  int R_max = 0;
  int M_FE = 0;
  int M_SG = 0;

  int space_rank(int space, int R) const {
    return std::min<int>(R, static_cast<int>(bases[static_cast<std::size_t>(space)].cols()));
  }
};

namespace detail {

inline Matrix sg_reduced_term(const SgSystem& sg, const Matrix& left, const Matrix& right,
                              int term) {
  // term 0: blockdiag A_m(0); term 1/2: I (x) Amu[term-1]
  Matrix out = Matrix::Zero(left.cols(), right.cols());
  const int M = sg.M_FE;
  if (term == 0) {
    SpMat A = sg.ops.A0;
    for (int m = 0; m < sg.M_SG; ++m) {
      sg.ops.combine_into(A, sg.mode_coeffs.row(m).transpose(), Eigen::Vector2d::Zero());
      out.noalias() += left.middleRows(static_cast<Index>(m) * M, M).transpose() *
                       (A * right.middleRows(static_cast<Index>(m) * M, M));
    }
  } else {
    const SpMat& C = sg.ops.Amu[static_cast<std::size_t>(term - 1)];
    for (int m = 0; m < sg.M_SG; ++m) {
      out.noalias() += left.middleRows(static_cast<Index>(m) * M, M).transpose() *
                       (C * right.middleRows(static_cast<Index>(m) * M, M));
    }
  }
  return out;
}

inline Matrix sg_reduced_operator(const std::array<Matrix, 3>& terms, const Eigen::Vector2d& mu,
                                  int rows, int cols) {
  Matrix B = terms[0].topLeftCorner(rows, cols);
  B.noalias() += mu(0) * terms[1].topLeftCorner(rows, cols);
  B.noalias() += mu(1) * terms[2].topLeftCorner(rows, cols);
  return B;
}

} // namespace detail

struct SgrbOfflineOptions {
  int r_max = 0;
  double rank_rel_tol = 1e-13;
  bool keep_snapshots = false;
};

struct SgrbOfflineResult {
  SgrbRom rom;
  std::array<PodBasis, SgrbRom::kNumSpaces> pods;
  std::array<Matrix, SgrbRom::kNumSpaces> snapshots;
};

/// Builds the SGRB reduced spaces from SGFE snapshots at the training
/// parameters, then the dual spaces in the required sequence (dual-2/3
/// right-hand sides involve the reduced primal and dual-1 solutions). The
/// full-order dual-3 solution is an exact scaling of dual-1 (its right-hand
/// side is a scalar multiple of l-bar); dual-2 requires genuine per-mode
/// solves since its load varies over modes.
SgrbOfflineResult build_sgrb_offline(const SgSystem& sg, const Matrix& train_points,
                                     const SgrbOfflineOptions& opt = {});

/// Reduced solution chain at one deterministic parameter: entirely
/// sampling-free (dense R x R solves plus cross-operator contractions).
struct SgrbChain {
  std::array<Vector, SgrbRom::kNumSpaces> u_hat;
  Vector mode_out;     // o^R = per-mode outputs of the reduced primal
  double lbar_uR = 0.0;
  double var_uR = 0.0; // exact V[l(u-bar^R)]
  std::array<double, SgrbRom::kNumSpaces> r_dual{}; // r-bar(u-bar^R_(i)), i = 1..3
  double corrected_mean() const { return lbar_uR - r_dual[1]; }
  double corrected_variance() const { return var_uR + r_dual[1] * r_dual[1] - r_dual[2] + r_dual[3]; }
};

class SgrbEvaluator {
public:
  SgrbEvaluator(const SgSystem& sg, const SgrbRom& rom)
      : sg_(sg), rom_(rom), riesz_(sg.ops.gram_X) {}

  const SgSystem& system() const { return sg_; }
  const SgrbRom& rom() const { return rom_; }
  const RieszContext& riesz() const { return riesz_; }
  std::uint64_t reduced_solve_count() const { return reduced_solve_count_; }

  double coercivity() const {
    if (!alpha_) alpha_ = coercivity_factor_sg(sg_);
    return *alpha_;
  }

  double gamma2() const {
    if (!gamma2_) gamma2_ = continuity_factor_gamma2(riesz_, sg_.ops.l_vec);
    return *gamma2_;
  }

  /// Primal and dual-1 reduced solves only (the offline pass-2 subset, when
  /// the dual-2/3 spaces do not exist yet).
  SgrbChain solve_primal_dual1(const Eigen::Vector2d& mu, int R) const {
    SgrbChain chain;
    solve_primal(chain, mu, R);
    solve_dual(chain, mu, R, 1, (-rom_.reduced_lbar[1].head(rom_.space_rank(1, R))).eval());
    return chain;
  }

  /// Sampling-free reduced chain: primal, dual-1, dual-2, dual-3 solves and
  /// the residual-corrected output statistics.
  SgrbChain solve_chain(const Eigen::Vector2d& mu, int R) const {
    SgrbChain chain = solve_primal_dual1(mu, R);
    solve_dual(chain, mu, R, 2,
               (-2.0 * rom_.mode_output[2].leftCols(rom_.space_rank(2, R)).transpose() *
                chain.mode_out)
                   .eval());
    const double c3 = chain.lbar_uR - chain.r_dual[1];
    solve_dual(chain, mu, R, 3,
               (-2.0 * c3 * rom_.reduced_lbar[3].head(rom_.space_rank(3, R))).eval());
    return chain;
  }

  /// Full-order residual vectors of the chain (for the bound evaluation).
  struct Residuals {
    Vector primal, dual1, dual2, dual3;
  };

  Residuals assemble_residuals(const SgrbChain& chain, const Eigen::Vector2d& mu, int R) const {
    Residuals res;
    const Vector w0 = rom_.bases[0].leftCols(rom_.space_rank(0, R)) * chain.u_hat[0];
    res.primal = sg_.f_bar() - sg_.apply(mu, w0);

    auto lift = [&](int i) {
      return (rom_.bases[static_cast<std::size_t>(i)].leftCols(rom_.space_rank(i, R)) *
              chain.u_hat[static_cast<std::size_t>(i)])
          .eval();
    };
    res.dual1 = -sg_.l_bar() - sg_.apply(mu, lift(1), true);

    Vector rhs2(sg_.total_dim());
    for (int m = 0; m < sg_.M_SG; ++m) {
      rhs2.segment(static_cast<Index>(m) * sg_.M_FE, sg_.M_FE) =
          -2.0 * chain.mode_out(m) * sg_.ops.l_vec;
    }
    res.dual2 = rhs2 - sg_.apply(mu, lift(2), true);

    const double c3 = chain.lbar_uR - chain.r_dual[1];
    res.dual3 = -2.0 * c3 * sg_.l_bar() - sg_.apply(mu, lift(3), true);
    return res;
  }

  /// Expected output with bound |E[l(u-bar)] - corrected| <= |r||r1|/alpha.
  McEstimate expectation_with_bound(const Eigen::Vector2d& mu, int R) const {
    const SgrbChain chain = solve_chain(mu, R);
    const Residuals res = assemble_residuals(chain, mu, R);
    const double nr = riesz_.dual_norm_blocked(res.primal);
    const double nr1 = riesz_.dual_norm_blocked(res.dual1);
    McEstimate est;
    est.value = chain.lbar_uR;
    est.corrected_value = chain.corrected_mean();
    est.bound = nr * nr1 / coercivity();
    est.components = {{"primal_residual_norm", nr},
                      {"dual1_residual_norm", nr1},
                      {"alpha_bar", coercivity()}};
    return est;
  }

  /// Output variance with the three-term bound
  /// gamma2 |r|^2/a^2 + |r|^2 |r1|^2/a^2 + |r2 - r3| |r|/a.
  McEstimate variance_with_bound(const Eigen::Vector2d& mu, int R) const {
    const SgrbChain chain = solve_chain(mu, R);
    const Residuals res = assemble_residuals(chain, mu, R);
    const double a = coercivity();
    const double nr = riesz_.dual_norm_blocked(res.primal);
    const double nr1 = riesz_.dual_norm_blocked(res.dual1);
    const double n23 = riesz_.dual_norm_blocked((res.dual2 - res.dual3).eval());

    McEstimate est;
    est.value = chain.var_uR;
    est.corrected_value = chain.corrected_variance();
    const double term1 = gamma2() * nr * nr / (a * a);
    const double term2 = nr * nr * nr1 * nr1 / (a * a);
    const double term3 = n23 * nr / a;
    est.bound = term1 + term2 + term3;
    est.components = {{"continuity_term", term1},
                      {"squared_residual_term", term2},
                      {"dual23_term", term3}};
    return est;
  }

  struct Statistics {
    McEstimate expectation;
    McEstimate variance;
  };

  /// Both statistics from one chain evaluation.
  Statistics statistics_with_bounds(const Eigen::Vector2d& mu, int R) const {
    const SgrbChain chain = solve_chain(mu, R);
    const Residuals res = assemble_residuals(chain, mu, R);
    const double a = coercivity();
    const double nr = riesz_.dual_norm_blocked(res.primal);
    const double nr1 = riesz_.dual_norm_blocked(res.dual1);
    const double n23 = riesz_.dual_norm_blocked((res.dual2 - res.dual3).eval());

    Statistics stats;
    stats.expectation.value = chain.lbar_uR;
    stats.expectation.corrected_value = chain.corrected_mean();
    stats.expectation.bound = nr * nr1 / a;
    stats.expectation.components = {{"primal_residual_norm", nr},
                                    {"dual1_residual_norm", nr1},
                                    {"alpha_bar", a}};
    stats.variance.value = chain.var_uR;
    stats.variance.corrected_value = chain.corrected_variance();
    const double term1 = gamma2() * nr * nr / (a * a);
    const double term2 = nr * nr * nr1 * nr1 / (a * a);
    const double term3 = n23 * nr / a;
    stats.variance.bound = term1 + term2 + term3;
    stats.variance.components = {{"continuity_term", term1},
                                 {"squared_residual_term", term2},
                                 {"dual23_term", term3}};
    return stats;
  }

private:
  void solve_primal(SgrbChain& chain, const Eigen::Vector2d& mu, int R) const {
    const int R0 = rom_.space_rank(0, R);
    if (R0 == 0) {
      chain.u_hat[0] = Vector();
      chain.mode_out = Vector::Zero(sg_.M_SG);
      return;
    }
    const Matrix B0 = detail::sg_reduced_operator(rom_.reduced_ops[0], mu, R0, R0);
    chain.u_hat[0] = Eigen::PartialPivLU<Matrix>(B0).solve(rom_.reduced_f[0].head(R0));
    ++reduced_solve_count_;
    chain.mode_out = rom_.mode_output[0].leftCols(R0) * chain.u_hat[0];
    chain.lbar_uR = sg_.E.dot(chain.mode_out);
    chain.var_uR = chain.mode_out.squaredNorm() - chain.lbar_uR * chain.lbar_uR;
  }

  void solve_dual(SgrbChain& chain, const Eigen::Vector2d& mu, int R, int i,
                  const Vector& rhs) const {
    const int Ri = rom_.space_rank(i, R);
    const int R0 = static_cast<int>(chain.u_hat[0].size());
    if (Ri == 0) {
      chain.u_hat[static_cast<std::size_t>(i)] = Vector();
      chain.r_dual[static_cast<std::size_t>(i)] = 0.0;
      return;
    }
    const Matrix Bi =
        detail::sg_reduced_operator(rom_.reduced_ops[static_cast<std::size_t>(i)], mu, Ri, Ri);
    chain.u_hat[static_cast<std::size_t>(i)] =
        Eigen::PartialPivLU<Matrix>(Bi.transpose()).solve(rhs);
    ++reduced_solve_count_;
    // r-bar(w) = f-bar(w) - a-bar(u^R, w) via the cross operators
    const Matrix C =
        detail::sg_reduced_operator(rom_.cross_ops[static_cast<std::size_t>(i)], mu, Ri, R0);
    chain.r_dual[static_cast<std::size_t>(i)] =
        rom_.reduced_f[static_cast<std::size_t>(i)].head(Ri).dot(
            chain.u_hat[static_cast<std::size_t>(i)]) -
        chain.u_hat[static_cast<std::size_t>(i)].dot(C * chain.u_hat[0]);
  }

  const SgSystem& sg_;
  const SgrbRom& rom_;
  RieszContext riesz_;
  mutable std::optional<double> alpha_;
  mutable std::optional<double> gamma2_;
  mutable std::uint64_t reduced_solve_count_ = 0;
};

inline SgrbOfflineResult build_sgrb_offline(const SgSystem& sg, const Matrix& train_points,
                                            const SgrbOfflineOptions& opt) {
  const int n_train = static_cast<int>(train_points.rows());
  const Index M_total = sg.total_dim();

  SgrbOfflineResult result;
  SgrbRom& rom = result.rom;
  rom.train_points = train_points;
  rom.M_FE = sg.M_FE;
  rom.M_SG = sg.M_SG;

  // pass 1: primal and dual-1 snapshots (shared factorization per block)
  Matrix U0(M_total, n_train), U1(M_total, n_train);
  {
    SpMat A = sg.ops.A0;
    SparseSolver solver;
    solver.analyze(A);
    for (int j = 0; j < n_train; ++j) {
      const Eigen::Vector2d mu = train_points.row(j).transpose();
      for (int m = 0; m < sg.M_SG; ++m) {
        sg.ops.combine_into(A, sg.mode_coeffs.row(m).transpose(), mu);
        solver.factorize(A);
        const Index off = static_cast<Index>(m) * sg.M_FE;
        U0.block(off, j, sg.M_FE, 1) = solver.solve((sg.E(m) * sg.ops.f_vec).eval());
        U1.block(off, j, sg.M_FE, 1) = solver.solve_transposed((-sg.E(m) * sg.ops.l_vec).eval());
      }
    }
  }

  auto inner = std::make_shared<SparseCholFactor>(sg.ops.gram_X);
  const BlockRepeatFactor S(inner, sg.M_SG);
  const DiagonalFactor W = DiagonalFactor::uniform(n_train, 1.0 / n_train);
  const Vector f_bar = sg.f_bar();
  const Vector l_bar = sg.l_bar();

  auto install_space = [&](int space, const Matrix& snapshots) {
    PodBasis pod = compute_pod(snapshots, S, W, "I_kron_gram_X");
    const int rank = static_cast<int>(pod.numerical_rank(opt.rank_rel_tol));
    const int R = (opt.r_max > 0) ? std::min(opt.r_max, rank) : rank;
    if (opt.r_max > rank) {
      std::cerr << "[rbuq] warning: SGRB space " << space << " snapshot rank " << rank
                << " < requested " << opt.r_max << "; truncating\n";
    }
    rom.bases[static_cast<std::size_t>(space)] = pod.Phi.leftCols(R);
    rom.singular_values[static_cast<std::size_t>(space)] = pod.singular_values.head(R);
    result.pods[static_cast<std::size_t>(space)] = std::move(pod);
    if (opt.keep_snapshots) result.snapshots[static_cast<std::size_t>(space)] = snapshots;

    const Matrix& V = rom.bases[static_cast<std::size_t>(space)];
    for (int t = 0; t < SgrbRom::kNumTerms; ++t) {
      rom.reduced_ops[static_cast<std::size_t>(space)][static_cast<std::size_t>(t)] =
          detail::sg_reduced_term(sg, V, V, t);
      rom.cross_ops[static_cast<std::size_t>(space)][static_cast<std::size_t>(t)] =
          detail::sg_reduced_term(sg, V, rom.bases[0], t);
    }
    rom.reduced_f[static_cast<std::size_t>(space)] = V.transpose() * f_bar;
    rom.reduced_lbar[static_cast<std::size_t>(space)] = V.transpose() * l_bar;
    Matrix& L = rom.mode_output[static_cast<std::size_t>(space)];
    L.resize(sg.M_SG, V.cols());
    for (Index r = 0; r < V.cols(); ++r) L.col(r) = sg.mode_outputs(V.col(r));
  };

  install_space(0, U0);
  install_space(1, U1);

  // pass 2: dual-2 needs per-mode full-order solves; dual-3 is the exact
  // scaling c_j of the dual-1 snapshot with
  // c_j = l-bar(u-bar) + l-bar(u-bar^R) - 2 r-bar(u-bar^R_(1))
  rom.R_max = std::min<int>(static_cast<int>(rom.bases[0].cols()),
                            static_cast<int>(rom.bases[1].cols()));
  SgrbEvaluator evaluator(sg, rom);
  Matrix U2(M_total, n_train), U3(M_total, n_train);
  {
    SpMat A = sg.ops.A0;
    SparseSolver solver;
    solver.analyze(A);
    for (int j = 0; j < n_train; ++j) {
      const Eigen::Vector2d mu = train_points.row(j).transpose();
      const SgrbChain chain = evaluator.solve_primal_dual1(mu, rom.R_max);
      const Vector o_full = sg.mode_outputs(U0.col(j));
      const Vector o_sum = o_full + chain.mode_out;
      for (int m = 0; m < sg.M_SG; ++m) {
        sg.ops.combine_into(A, sg.mode_coeffs.row(m).transpose(), mu);
        solver.factorize(A);
        const Index off = static_cast<Index>(m) * sg.M_FE;
        U2.block(off, j, sg.M_FE, 1) =
            solver.solve_transposed((-o_sum(m) * sg.ops.l_vec).eval());
      }
      const double c_j = sg.E.dot(o_full) + chain.lbar_uR - 2.0 * chain.r_dual[1];
      U3.col(j) = c_j * U1.col(j);
    }
  }
  install_space(2, U2);
  install_space(3, U3);

  rom.R_max = rom.bases[0].cols();
  for (int i = 1; i < SgrbRom::kNumSpaces; ++i) {
    rom.R_max =
        std::min<int>(rom.R_max, static_cast<int>(rom.bases[static_cast<std::size_t>(i)].cols()));
  }
  return result;
}

} // namespace rbuq
