#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rbuq/drivers.hpp"

namespace rbuq {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

// Gauss rule on [-1,1] derived from the Jacobi matrix of the uniform
// density (nodes are diag_values / sqrt(3), weights the squared
// expectation coefficients times 2).
struct QuadRule {
  Vector nodes;
  Vector weights;
};

inline QuadRule gauss_rule(int points) {
  const DoubleOrthogonalBasis b = build_double_orthogonal_basis(points - 1, 1);
  QuadRule rule;
  rule.nodes = b.diag_values / kSqrt3;
  rule.weights = 2.0 * b.expectation_weights.array().square();
  return rule;
}

template <class F>
double integrate(F f, double a, double b, int subdivisions, const QuadRule& rule) {
  const double h = (b - a) / subdivisions;
  double total = 0.0;
  for (int s = 0; s < subdivisions; ++s) {
    const double lo = a + s * h;
    for (Index q = 0; q < rule.nodes.size(); ++q) {
      total += 0.5 * h * rule.weights(q) * f(lo + 0.5 * h * (rule.nodes(q) + 1.0));
    }
  }
  return total;
}

class CheckRecorder {
public:
  explicit CheckRecorder(ValidationReport& report, std::ostream& log)
      : report_(report), log_(log) {}

  void record(const std::string& name, bool passed, const std::string& detail) {
    report_.checks.push_back({name, passed, detail});
    log_ << (passed ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : " - " + detail)
         << "\n"
         << std::flush;
  }

  /// Runs `fn`, which returns a detail string or throws; failure detail is
  /// captured either way.
  void run(const std::string& name, const std::function<std::string()>& fn) {
    try {
      record(name, true, fn());
    } catch (const std::exception& err) {
      record(name, false, err.what());
    }
  }

private:
  ValidationReport& report_;
  std::ostream& log_;
};

inline void check(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

} // namespace detail

/// Runs every module invariant suite plus the cross-model checks on a
/// loaded artifact; prints one line per check.
inline ValidationReport cmd_validate(const OfflineArtifact& art, const ModelAssets& assets,
                                     std::ostream& log = std::cout) {
  ValidationReport report;
  detail::CheckRecorder rec(report, log);
  const StudyConfig& cfg = art.config;

  rec.run("mesh/geometry", [&] {
    const Triangulation& mesh = assets.mesh;
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const double a = mesh.triangle_area(static_cast<int>(t));
      detail::check(a > 0.0, "non-positive triangle area");
      area += a;
    }
    detail::check(std::abs(area - 1.0) <= 1e-12, "total area mismatch");
    const int n = mesh.n_cells_per_side;
    detail::check(mesh.n_interior == (n - 1) * (n - 1), "interior DOF count mismatch");
    return "area 1, " + std::to_string(mesh.n_interior) + " interior DOFs";
  });

  rec.run("assembly/symmetry", [&] {
    const auto& ops = assets.ops;
    auto sym_defect = [](const SpMat& A) {
      const Matrix D(A);
      return (D - D.transpose()).cwiseAbs().maxCoeff() / D.cwiseAbs().maxCoeff();
    };
    detail::check(sym_defect(ops.A0) <= 1e-13, "A0 not symmetric");
    detail::check(sym_defect(ops.gram_X) <= 1e-13, "gram_X not symmetric");
    for (const auto& Ayk : ops.Ay) detail::check(sym_defect(Ayk) <= 1e-13, "Ay not symmetric");
    for (const auto& C : ops.Amu) {
      const Matrix D(C);
      detail::check((D + D.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * D.cwiseAbs().maxCoeff(),
                    "convection not skew-symmetric");
    }
    RieszContext riesz(ops.gram_X); // throws if not SPD
    return std::string("A0/Ay symmetric, Amu skew, gram_X SPD");
  });

  rec.run("assembly/galerkin-consistency", [&] {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uy(-kSqrt3, kSqrt3);
    std::uniform_real_distribution<double> umu(cfg.model.mu_min, cfg.model.mu_max);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      Vector y(cfg.model.kl_modes);
      for (int k = 0; k < cfg.model.kl_modes; ++k) y(k) = uy(rng);
      const Eigen::Vector2d mu(umu(rng), umu(rng));
      const SpMat direct = assemble_parametric_matrix(assets.mesh, assets.kl, cfg.model.kappa0,
                                                      cfg.model.sigma, y, mu);
      const SpMat affine = assets.ops.combine(y, mu);
      const double scale = Matrix(direct).cwiseAbs().maxCoeff();
      worst = std::max(worst, (Matrix(affine) - Matrix(direct)).cwiseAbs().maxCoeff() / scale);
    }
    detail::check(worst <= 1e-14, "affine combination deviates from direct assembly");
    return "max relative entry deviation " + detail::fmt(worst);
  });

  rec.run("kl/eigenpairs", [&] {
    const double c = 1.0 / cfg.model.correlation_length;
    double trace = 0.0;
    for (std::size_t k = 0; k < assets.kl.modes_1d.size(); ++k) {
      const auto& m = assets.kl.modes_1d[k];
      const double res = (m.parity == Kl1dMode::Parity::even)
                             ? c - m.omega * std::tan(0.5 * m.omega)
                             : m.omega + c * std::tan(0.5 * m.omega);
      detail::check(std::abs(res) <= 1e-11 * (1.0 + m.omega), "transcendental residual too large");
      trace += m.lambda_1d;
      detail::check(trace < 1.0 + 1e-12, "partial eigenvalue sum exceeds unit trace");
    }
    for (int k = 1; k < assets.kl.num_modes; ++k)
      detail::check(assets.kl.lambda(k) <= assets.kl.lambda(k - 1), "2D eigenvalues not sorted");
    return "residuals ok, partial trace " + detail::fmt(trace);
  });

  rec.run("kl/integral-equation", [&] {
    const auto rule = detail::gauss_rule(5);
    const double L = cfg.model.correlation_length;
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, assets.kl.modes_1d.size()); ++k) {
      const auto& mode = assets.kl.modes_1d[k];
      for (double s : {-0.35, 0.1, 0.4}) {
        auto integrand = [&](double t) { return std::exp(-std::abs(s - t) / L) * mode.eval(t); };
        const double lhs = detail::integrate(integrand, -0.5, s, 120, rule) +
                           detail::integrate(integrand, s, 0.5, 120, rule);
        const double rhs = mode.lambda_1d * mode.eval(s);
        worst = std::max(worst, std::abs(lhs - rhs) / (mode.lambda_1d * (1.0 + std::abs(mode.eval(s)))));
      }
    }
    detail::check(worst <= 1e-6, "covariance integral equation violated");
    return "max relative defect " + detail::fmt(worst);
  });

  rec.run("kl/orthonormality", [&] {
    const auto rule = detail::gauss_rule(5);
    double worst = 0.0;
    const std::size_t nm = std::min<std::size_t>(4, assets.kl.modes_1d.size());
    for (std::size_t a = 0; a < nm; ++a) {
      for (std::size_t b = a; b < nm; ++b) {
        const double inner = detail::integrate(
            [&](double s) { return assets.kl.modes_1d[a].eval(s) * assets.kl.modes_1d[b].eval(s); },
            -0.5, 0.5, 200, rule);
        worst = std::max(worst, std::abs(inner - (a == b ? 1.0 : 0.0)));
      }
    }
    detail::check(worst <= 1e-10, "1D eigenfunctions not orthonormal");
    return "max Gram defect " + detail::fmt(worst);
  });

  rec.run("sg-basis/double-orthogonality", [&] {
    const auto& basis = assets.sg.basis;
    const Matrix QtQ = basis.Q.transpose() * basis.Q;
    detail::check(
        (QtQ - Matrix::Identity(QtQ.rows(), QtQ.cols())).cwiseAbs().maxCoeff() <= 1e-12,
        "rotation not orthogonal");
    detail::check(std::abs(basis.expectation_weights.squaredNorm() - 1.0) <= 1e-12,
                  "expectation weights not unit norm");
    // quadrature-verified double orthogonality
    const auto rule = detail::gauss_rule(basis.degree + 2);
    double worst = 0.0;
    for (int m = 0; m <= basis.degree; ++m) {
      for (int n = 0; n <= basis.degree; ++n) {
        double gram = 0.0, ymom = 0.0;
        for (Index q = 0; q < rule.nodes.size(); ++q) {
          const double y = kSqrt3 * rule.nodes(q);
          const double pm = evaluate_double_orthogonal_1d(basis, m, y);
          const double pn = evaluate_double_orthogonal_1d(basis, n, y);
          gram += 0.5 * rule.weights(q) * pm * pn;
          ymom += 0.5 * rule.weights(q) * y * pm * pn;
        }
        worst = std::max(worst, std::abs(gram - (m == n ? 1.0 : 0.0)));
        worst = std::max(worst,
                         std::abs(ymom - (m == n ? basis.diag_values(m) : 0.0)));
      }
    }
    detail::check(worst <= 1e-12, "double orthogonality violated");
    const Vector E = sg_expectation_vector(basis);
    detail::check(std::abs(E.squaredNorm() - 1.0) <= 1e-12, "tensor expectation vector norm");
    return "max identity defect " + detail::fmt(worst);
  });

  rec.run("samples/determinism-and-range", [&] {
    detail::check((art.samples.samples.array().abs() <= kSqrt3).all(), "sample out of range");
    const SampleSet regen =
        draw_mc_samples(art.samples.N_xi, art.samples.K, art.samples.seed);
    detail::check(regen.samples == art.samples.samples, "sample set not reproducible from seed");
    for (int k = 0; k < art.samples.K; ++k) {
      const auto col = art.samples.samples.col(k);
      const double mean = col.mean();
      const double var = (col.array() - mean).square().sum() / (art.samples.N_xi - 1);
      detail::check(std::abs(mean) <= 5.0 / std::sqrt(double(art.samples.N_xi)),
                    "sample mean outlier in dimension " + std::to_string(k));
      // var(sample variance) for uniform: (m4 - v^2)/N with m4 = 9/5
      const double se_var = std::sqrt((9.0 / 5.0 - 1.0) / art.samples.N_xi);
      detail::check(std::abs(var - 1.0) <= 5.0 * se_var,
                    "sample variance outlier in dimension " + std::to_string(k));
    }
    return std::to_string(art.samples.N_xi) + " samples bitwise reproducible";
  });

  rec.run("pod/optimality", [&] {
    // subsampled snapshot rebuild; the full-scale identity is covered by
    // the acceptance suite
    const int n_xi = std::min(4, art.samples.N_xi);
    const int n_tr = std::min(4, static_cast<int>(art.mcrb.train_points.rows()));
    Matrix U(assets.ops.M_FE, n_xi * n_tr);
    for (int j = 0; j < n_tr; ++j) {
      for (int i = 0; i < n_xi; ++i) {
        U.col(j * n_xi + i) = solve_mcfe(assets.ops, art.samples.sample(i),
                                         art.mcrb.train_points.row(j).transpose());
      }
    }
    const SparseCholFactor S(assets.ops.gram_X);
    const DiagonalFactor W = DiagonalFactor::uniform(U.cols(), 1.0 / U.cols());
    const PodBasis pod = compute_pod(U, S, W, "gram_X");
    const Vector errs = projection_errors(U, S, W, pod);
    double worst = 0.0;
    for (Index r = 0; r <= pod.rank_retained(); ++r) {
      double tail = 0.0;
      for (Index k = r; k < pod.singular_values.size(); ++k)
        tail += pod.singular_values(k) * pod.singular_values(k);
      worst = std::max(worst, std::abs(errs(r) - tail) / errs(0));
    }
    detail::check(worst <= 1e-10, "POD objective deviates from the singular value tail");
    return "max identity defect " + detail::fmt(worst) + " over " +
           std::to_string(pod.rank_retained() + 1) + " ranks";
  });

  rec.run("artifact/bases-orthonormal", [&] {
    double worst = 0.0;
    for (int i = 0; i < McrbRom::kNumSpaces; ++i) {
      const Matrix& V = art.mcrb.bases[static_cast<std::size_t>(i)];
      const Matrix gram = V.transpose() * assets.ops.gram_X * V;
      worst = std::max(worst,
                       (gram - Matrix::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < SgrbRom::kNumSpaces; ++i) {
      const Matrix& V = art.sgrb.bases[static_cast<std::size_t>(i)];
      Matrix gram = Matrix::Zero(V.cols(), V.cols());
      for (int m = 0; m < art.sgrb.M_SG; ++m) {
        const auto rows = V.middleRows(static_cast<Index>(m) * art.sgrb.M_FE, art.sgrb.M_FE);
        gram += rows.transpose() * (assets.ops.gram_X * rows);
      }
      worst = std::max(worst,
                       (gram - Matrix::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff());
    }
    detail::check(worst <= 1e-10, "reduced basis lost orthonormality");
    return "max Gram defect " + detail::fmt(worst);
  });

  rec.run("artifact/reduced-operator-affinity", [&] {
    double worst = 0.0;
    std::vector<const SpMat*> terms{&assets.ops.A0};
    for (const auto& Ayk : assets.ops.Ay) terms.push_back(&Ayk);
    terms.push_back(&assets.ops.Amu[0]);
    terms.push_back(&assets.ops.Amu[1]);
    for (int i = 0; i < McrbRom::kNumSpaces; ++i) {
      const auto s = static_cast<std::size_t>(i);
      const Matrix& V = art.mcrb.bases[s];
      for (std::size_t q = 0; q < terms.size(); ++q) {
        const Matrix direct = V.transpose() * (*terms[q]) * V;
        const double scale = std::max(1e-300, direct.cwiseAbs().maxCoeff());
        worst = std::max(worst,
                         (direct - art.mcrb.reduced_ops[s][q]).cwiseAbs().maxCoeff() / scale);
      }
    }
    for (int i = 0; i < SgrbRom::kNumSpaces; ++i) {
      const auto s = static_cast<std::size_t>(i);
      const Matrix& V = art.sgrb.bases[s];
      for (int q = 0; q < SgrbRom::kNumTerms; ++q) {
        const Matrix direct = detail::sg_reduced_term(assets.sg, V, V, q);
        const double scale = std::max(1e-300, direct.cwiseAbs().maxCoeff());
        worst = std::max(
            worst,
            (direct - art.sgrb.reduced_ops[s][static_cast<std::size_t>(q)]).cwiseAbs().maxCoeff() /
                scale);
      }
    }
    detail::check(worst <= 1e-12, "stored reduced operators deviate from V^T A_q V");
    return "max relative defect " + detail::fmt(worst);
  });

  rec.run("sgrb/block-kronecker-equivalence", [&] {
    // built-in tiny instance: one interior DOF, K=2, d=1
    const Triangulation mesh = build_mesh(2);
    const KlExpansion kl = build_kl_2d(1.0, 2);
    const AffineOperatorSet ops = assemble_operators(mesh, kl, cfg.model.kappa0, cfg.model.sigma);
    const SgSystem sg = build_sg_system(ops, build_double_orthogonal_basis(1, 2));
    const Eigen::Vector2d mu(77.0, -31.0);

    Matrix J = Matrix::Zero(2, 2);
    J(0, 1) = J(1, 0) = kSqrt3 / std::sqrt(3.0);
    Matrix G = Matrix::Zero(4, 4);
    const double a0mu = Matrix(ops.A0)(0, 0); // convection vanishes on one DOF
    for (int a = 0; a < 4; ++a) {
      const int a0 = a / 2, a1 = a % 2;
      for (int b = 0; b < 4; ++b) {
        const int b0 = b / 2, b1 = b % 2;
        double v = (a == b) ? a0mu : 0.0;
        if (a1 == b1) v += J(a0, b0) * Matrix(ops.Ay[0])(0, 0);
        if (a0 == b0) v += J(a1, b1) * Matrix(ops.Ay[1])(0, 0);
        G(a, b) = v;
      }
    }
    Vector rhs = Vector::Zero(4);
    rhs(0) = ops.f_vec(0);
    const Vector u_leg = G.partialPivLu().solve(rhs);
    const Vector u_blk = solve_sgfe(sg, mu);

    double worst = 0.0;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> uy(-kSqrt3, kSqrt3);
    for (int trial = 0; trial < 3; ++trial) {
      Vector y(2);
      y << uy(rng), uy(rng);
      double at_leg = 0.0, at_blk = 0.0;
      for (int a = 0; a < 4; ++a) {
        const double p0 = (a / 2 == 0) ? 1.0 : y(0);
        const double p1 = (a % 2 == 0) ? 1.0 : y(1);
        at_leg += p0 * p1 * u_leg(a);
      }
      for (int m = 0; m < 4; ++m) at_blk += evaluate_double_orthogonal(sg.basis, m, y) * u_blk(m);
      worst = std::max(worst, std::abs(at_leg - at_blk) / std::max(1e-300, std::abs(at_leg)));
    }
    detail::check(worst <= 1e-8, "block and Kronecker solutions disagree");
    return "max relative deviation " + detail::fmt(worst);
  });

  rec.run("estimators/algebra", [&] {
    Vector g(3);
    g << 1.0, 2.0, 3.0;
    const McMoments m = mc_estimators(g);
    detail::check(m.mean == 2.0 && m.mean_nm1 == 3.0 && m.variance == 1.0,
                  "hand-computed estimator values wrong");
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    Vector h(32);
    for (int i = 0; i < 32; ++i) h(i) = gauss(rng);
    const double v0 = mc_estimators(h).variance;
    const double v1 = mc_estimators((h.array() + 5.0).matrix()).variance;
    detail::check(std::abs(v1 - v0) <= 1e-9 * v0, "variance estimator not shift invariant");
    return std::string("E/E_/V identities hold");
  });

  rec.run("sg-vs-mc/consistency", [&] {
    const Matrix mus = testing_points(cfg).topRows(3);
    const SampleSet ref = draw_mc_samples(cfg.discretization.reference.n_mc_samples,
                                          cfg.model.kl_modes, cfg.discretization.reference.mc_seed);
    const McrbEvaluator tmp_ev(assets.ops, art.mcrb, ref);
    std::string detail_str;
    for (int p = 0; p < 3; ++p) {
      const Eigen::Vector2d mu = mus.row(p).transpose();
      const Vector lu = tmp_ev.mcfe_output_sweep(mu);
      const McMoments mc = mc_estimators(lu);
      const SgOutputMoments sgm = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
      const double se_mean = std::sqrt(mc.variance / ref.N_xi);
      detail::check(std::abs(sgm.mean - mc.mean) <= 4.0 * se_mean,
                    "SG and MC expectations disagree at test point " + std::to_string(p));
      const double m2 = lu.squaredNorm() / ref.N_xi - mc.mean * mc.mean;
      const double m4 = (lu.array() - mc.mean).pow(4).sum() / ref.N_xi;
      const double se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / ref.N_xi);
      detail::check(std::abs(sgm.variance - mc.variance) <= 8.0 * se_var,
                    "SG and MC variances disagree at test point " + std::to_string(p));
      if (p == 0) detail_str = "|dE|/se " + detail::fmt(std::abs(sgm.mean - mc.mean) / se_mean);
    }
    return detail_str;
  });

  rec.run("bounds/pointwise", [&] {
    const McrbEvaluator ev(assets.ops, art.mcrb, art.samples);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uy(-kSqrt3, kSqrt3);
    std::uniform_real_distribution<double> umu(cfg.model.mu_min, cfg.model.mu_max);
    std::uniform_int_distribution<int> uR(1, art.mcrb.R_max);
    double tightest = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 12; ++trial) {
      Vector y(cfg.model.kl_modes);
      for (int k = 0; k < cfg.model.kl_modes; ++k) y(k) = uy(rng);
      const Eigen::Vector2d mu(umu(rng), umu(rng));
      const int R = uR(rng);
      const McEstimate est = ev.output_with_bound(y, mu, R);
      const double truth = assets.ops.l_vec.dot(solve_mcfe(assets.ops, y, mu));
      const double err = std::abs(truth - est.corrected_value);
      detail::check(err <= est.bound + 1e-12, "point-wise output bound violated");
      if (err > 0.0) tightest = std::min(tightest, est.bound / err);
    }
    return "bound/error ratio >= " + detail::fmt(tightest);
  });

  rec.run("bounds/statistics", [&] {
    const McrbEvaluator mcrb_ev(assets.ops, art.mcrb, art.samples);
    const SgrbEvaluator sgrb_ev(assets.sg, art.sgrb);
    const Matrix mus = testing_points(cfg).topRows(2);
    const std::vector<int> r_probe = {1, std::max(1, art.mcrb.R_max / 2), art.mcrb.R_max};
    for (int p = 0; p < 2; ++p) {
      const Eigen::Vector2d mu = mus.row(p).transpose();
      const McMoments mcfe = mc_estimators(mcrb_ev.mcfe_output_sweep(mu));
      const SgOutputMoments sgfe = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
      for (int R : r_probe) {
        const auto ms = mcrb_ev.statistics_with_bounds(mu, std::min(R, art.mcrb.R_max));
        detail::check(std::abs(mcfe.mean - ms.expectation.corrected_value) <=
                          ms.expectation.bound + 1e-12,
                      "MCRB expectation bound violated");
        detail::check(std::abs(mcfe.variance - ms.variance.corrected_value) <=
                          ms.variance.bound + 1e-12,
                      "MCRB variance bound violated");
        const auto ss = sgrb_ev.statistics_with_bounds(mu, std::min(R, art.sgrb.R_max));
        detail::check(std::abs(sgfe.mean - ss.expectation.corrected_value) <=
                          ss.expectation.bound + 1e-12,
                      "SGRB expectation bound violated");
        detail::check(std::abs(sgfe.variance - ss.variance.corrected_value) <=
                          ss.variance.bound + 1e-12,
                      "SGRB variance bound violated");
      }
    }
    return "bounds valid at 2 test parameters x " + std::to_string(r_probe.size()) + " ranks";
  });

  return report;
}

} // namespace rbuq
