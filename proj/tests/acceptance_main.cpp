// Acceptance suite: runs the full production-scale study and checks every
// acceptance criterion at its stated tolerance, printing one line per
// criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rbuq/drivers.hpp"
#include "rbuq/validate.hpp"

using namespace rbuq;

namespace {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CriterionResult> g_results;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  g_results.push_back({id, name, passed, detail});
  std::cout << (passed ? "[PASS] " : "[FAIL] ") << "criterion " << id << " (" << name << "): "
            << detail << "\n"
            << std::flush;
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

struct StageTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  void stage(const std::string& what) {
    std::cerr << "[acceptance " << fmt(elapsed_since(t0)) << "s] " << what << "\n" << std::flush;
  }
};

} // namespace

int main() {
  StageTimer timer;
  const StudyConfig cfg = StudyConfig::defaults();

  timer.stage("building default and reference models");
  const ModelAssets assets = build_model_assets(cfg);
  const ModelAssets ref_mesh = build_model_assets(cfg.model, cfg.discretization.reference.n_cells,
                                                  cfg.discretization.sg_degree);
  const SampleSet samples = draw_mc_samples(cfg.discretization.n_mc_samples, cfg.model.kl_modes,
                                            cfg.discretization.mc_seed);
  const Matrix train = training_points(cfg);
  const Matrix test = testing_points(cfg);

  timer.stage("MCRB offline build");
  McrbOfflineOptions mopt;
  mopt.keep_snapshots = true;
  McrbOfflineResult mcrb_off = build_mcrb_offline(assets.ops, samples, train, mopt);

  timer.stage("SGRB offline build");
  SgrbOfflineOptions sopt;
  sopt.keep_snapshots = true;
  SgrbOfflineResult sgrb_off = build_sgrb_offline(assets.sg, train, sopt);

  const McrbEvaluator mcrb_ev(assets.ops, mcrb_off.rom, samples);
  const SgrbEvaluator sgrb_ev(assets.sg, sgrb_off.rom);
  report(0, "offline build sizes", assets.ops.M_FE == 225 && assets.sg.M_SG == 243 &&
                                       mcrb_off.rom.R_max >= 64 && sgrb_off.rom.R_max >= 64,
         "M_FE=" + std::to_string(assets.ops.M_FE) + " (=225), M_SG=" +
             std::to_string(assets.sg.M_SG) + " (=243), R_max mcrb=" +
             std::to_string(mcrb_off.rom.R_max) + " sgrb=" + std::to_string(sgrb_off.rom.R_max) +
             " (each >= 64)");

  // ---- criterion 4: POD optimality on all nine snapshot PODs -------------
  timer.stage("criterion 4: POD optimality identities");
  {
    double worst = 0.0;
    int checked = 0;
    auto check_pod = [&](const Matrix& snapshots, const PodBasis& pod, const SpdFactor& S) {
      const DiagonalFactor W = DiagonalFactor::uniform(snapshots.cols(), 1.0 / snapshots.cols());
      const Vector errs = projection_errors(snapshots, S, W, pod);
      for (Index r = 0; r <= pod.rank_retained(); ++r) {
        double tail = 0.0;
        for (Index k = r; k < pod.singular_values.size(); ++k)
          tail += pod.singular_values(k) * pod.singular_values(k);
        worst = std::max(worst, std::abs(errs(r) - tail) / errs(0));
      }
      ++checked;
    };
    const SparseCholFactor S_fe(assets.ops.gram_X);
    for (int i = 0; i < McrbRom::kNumSpaces; ++i) {
      check_pod(mcrb_off.snapshots[static_cast<std::size_t>(i)],
                mcrb_off.pods[static_cast<std::size_t>(i)], S_fe);
      mcrb_off.snapshots[static_cast<std::size_t>(i)].resize(0, 0);
    }
    auto inner = std::make_shared<SparseCholFactor>(assets.ops.gram_X);
    const BlockRepeatFactor S_sg(inner, assets.sg.M_SG);
    for (int i = 0; i < SgrbRom::kNumSpaces; ++i) {
      check_pod(sgrb_off.snapshots[static_cast<std::size_t>(i)],
                sgrb_off.pods[static_cast<std::size_t>(i)], S_sg);
      sgrb_off.snapshots[static_cast<std::size_t>(i)].resize(0, 0);
    }
    report(4, "POD optimality", worst <= 1e-10,
           "max |objective - tail|/total = " + fmt(worst) + " over " + std::to_string(checked) +
               " PODs (tolerance 1e-10)");
  }

  // ---- criterion 6: estimator algebra and unbiasedness -------------------
  timer.stage("criterion 6: MC estimator algebra");
  {
    Vector g(3);
    g << 1.0, 2.0, 3.0;
    const McMoments m = mc_estimators(g);
    const bool exact = (m.mean == 2.0 && m.mean_nm1 == 3.0 && m.variance == 1.0);

    const int n_seeds = 1000, n = 32;
    Vector vhat(n_seeds);
    for (int s = 0; s < n_seeds; ++s) {
      const SampleSet set = draw_mc_samples(n, 1, 555000 + static_cast<std::uint64_t>(s));
      vhat(s) = mc_estimators(set.samples.col(0)).variance;
    }
    const double mean_v = vhat.mean();
    const double se = std::sqrt((vhat.array() - mean_v).square().sum() / (n_seeds - 1)) /
                      std::sqrt(double(n_seeds));
    const bool unbiased = std::abs(mean_v - 1.0) <= 3.0 * se;
    report(6, "estimator algebra", exact && unbiased,
           std::string("exact (2,3,1): ") + (exact ? "yes" : "no") + "; mean V over 1000 seeds = " +
               fmt(mean_v) + " (|dev|/se = " + fmt(std::abs(mean_v - 1.0) / se) + " <= 3)");
  }

  // ---- main sweep over the test parameters (criteria 1, 2, 7) ------------
  timer.stage("criteria 1/2/7: sweep over 64 test parameters x R in {1..64}");
  const std::vector<int> r_values = cfg.run.r_values;
  const int n_test = static_cast<int>(test.rows());
  const int n_r = static_cast<int>(r_values.size());
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity(); // min(bound - error)
  int c2_mcrb_ok = 0, c2_sgrb_ok = 0, c7_ok = 0;
  Vector mean_bound_e_mcrb = Vector::Zero(n_r), mean_bound_v_mcrb = Vector::Zero(n_r);
  Vector point0_err_e(n_r), point0_bnd_e(n_r), point0_err_v(n_r), point0_bnd_v(n_r);
  Matrix rms_err = Matrix::Zero(n_r, 4); // mean squared errors per statistic
  for (int p = 0; p < n_test; ++p) {
    const Eigen::Vector2d mu = test.row(p).transpose();
    const McMoments mcfe = mc_estimators(mcrb_ev.mcfe_output_sweep(mu));
    const McMoments mcfe32 = mc_estimators(mcfe_output_sweep(ref_mesh.ops, samples, mu));
    const SgOutputMoments sgfe = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
    const SgOutputMoments sgfe32 = sg_output_moments(ref_mesh.sg, solve_sgfe(ref_mesh.sg, mu));

    for (int ri = 0; ri < n_r; ++ri) {
      const int R = r_values[static_cast<std::size_t>(ri)];
      const auto ms = mcrb_ev.statistics_with_bounds(mu, std::min(R, mcrb_off.rom.R_max));
      const auto ss = sgrb_ev.statistics_with_bounds(mu, std::min(R, sgrb_off.rom.R_max));

      const double errs[4] = {std::abs(mcfe.mean - ms.expectation.corrected_value),
                              std::abs(mcfe.variance - ms.variance.corrected_value),
                              std::abs(sgfe.mean - ss.expectation.corrected_value),
                              std::abs(sgfe.variance - ss.variance.corrected_value)};
      const double bnds[4] = {ms.expectation.bound, ms.variance.bound, ss.expectation.bound,
                              ss.variance.bound};
      for (int q = 0; q < 4; ++q) {
        if (errs[q] > bnds[q] + 1e-12) ++violations;
        worst_margin = std::min(worst_margin, bnds[q] + 1e-12 - errs[q]);
      }

      mean_bound_e_mcrb(ri) += ms.expectation.bound / n_test;
      mean_bound_v_mcrb(ri) += ms.variance.bound / n_test;
      for (int q = 0; q < 4; ++q) rms_err(ri, q) += errs[q] * errs[q] / n_test;
      if (p == 0) {
        point0_err_e(ri) = errs[0];
        point0_bnd_e(ri) = bnds[0];
        point0_err_v(ri) = errs[1];
        point0_bnd_v(ri) = bnds[1];
      }

      if (R == 16) {
        const double proxy_fe_mc = std::abs(mcfe.mean - mcfe32.mean);
        const double proxy_fe_sg = std::abs(sgfe.mean - sgfe32.mean);
        if (errs[0] < proxy_fe_mc) ++c2_mcrb_ok;
        if (errs[2] < proxy_fe_sg) ++c2_sgrb_ok;
      }
      if (R == 64) {
        const auto& comp = ss.variance.components;
        const double t1 = comp.at("continuity_term");
        const double t2 = comp.at("squared_residual_term");
        const double t3 = comp.at("dual23_term");
        if (t1 > t2 && t1 > t3) ++c7_ok;
      }
    }
    if ((p + 1) % 8 == 0) timer.stage("  test point " + std::to_string(p + 1) + "/64 done");
  }
  report(1, "bound validity on the test sweep", violations == 0,
         std::to_string(violations) + " violations over " +
             std::to_string(n_test * static_cast<int>(r_values.size()) * 4) +
             " (mu, R, statistic) checks; min slack = " + fmt(worst_margin));
  {
    const double frac_mc = double(c2_mcrb_ok) / n_test, frac_sg = double(c2_sgrb_ok) / n_test;
    report(2, "R=16 on par with the FE discretization error", frac_mc >= 0.9 && frac_sg >= 0.9,
           "expectation error below the FE proxy at " + fmt(100.0 * frac_mc) + "% (MCRB) and " +
               fmt(100.0 * frac_sg) + "% (SGRB) of test points (required >= 90%)");
    const double frac_c7 = double(c7_ok) / n_test;
    report(7, "SGRB variance bound dominated by the continuity term", frac_c7 >= 0.9,
           "continuity term largest at R=64 for " + fmt(100.0 * frac_c7) +
               "% of test points (required >= 90%)");
  }

  // additional module invariants that need production-scale decay data:
  // monotone bound trend and error/bound co-convergence of the MCRB model
  {
    double worst_ratio = 0.0;
    for (int ri = 1; ri < n_r; ++ri) {
      worst_ratio = std::max(worst_ratio, mean_bound_e_mcrb(ri) / mean_bound_e_mcrb(ri - 1));
      worst_ratio = std::max(worst_ratio, mean_bound_v_mcrb(ri) / mean_bound_v_mcrb(ri - 1));
    }
    report(11, "MCRB bound decay trend (module invariant)", worst_ratio <= 3.0,
           "max successive mean-bound ratio " + fmt(worst_ratio) + " (<= 3)");

    auto gap_span = [&](const Vector& err, const Vector& bnd) {
      double lo = 1e300, hi = -1e300;
      for (int ri = 0; ri < n_r; ++ri) {
        if (r_values[static_cast<std::size_t>(ri)] < 4) continue;
        const double gap = std::log10(bnd(ri)) - std::log10(std::max(err(ri), 1e-300));
        lo = std::min(lo, gap);
        hi = std::max(hi, gap);
      }
      return hi - lo;
    };
    const double span_e = gap_span(point0_err_e, point0_bnd_e);
    const double span_v = gap_span(point0_err_v, point0_bnd_v);
    report(12, "MCRB error/bound co-convergence (module invariant)",
           span_e < 3.0 && span_v < 3.0,
           "log10(bound/error) variation across R in {4..64}: " + fmt(span_e) +
               " (expectation), " + fmt(span_v) + " (variance); each < 3");

    // convergence-table decay: the R=64 rows sit at least 4 orders of
    // magnitude below the R=1 rows (L2-averaged over the test set)
    double worst_drop = 1e300;
    for (int q = 0; q < 4; ++q) {
      worst_drop = std::min(worst_drop, std::sqrt(rms_err(0, q) / rms_err(n_r - 1, q)));
    }
    report(13, "error decay from R=1 to R=64", worst_drop >= 1e4,
           "smallest RMS-error drop factor " + fmt(worst_drop) + " (>= 1e4)");
  }

  // ---- criterion 3: reproduction exactness at the training set -----------
  timer.stage("criterion 3: reproduction at the 64 training parameters");
  {
    double max_resid = 0.0, max_bound = 0.0, max_rel_err = 0.0;
    for (int j = 0; j < static_cast<int>(train.rows()); ++j) {
      const Eigen::Vector2d mu = train.row(j).transpose();

      McrbEvaluator::SweepDiagnostics diag;
      const auto ms = mcrb_ev.statistics_with_bounds(mu, mcrb_off.rom.R_max, &diag);
      for (double nr : diag.max_residual_norm) max_resid = std::max(max_resid, nr);
      max_bound = std::max(max_bound, std::max(ms.expectation.bound, ms.variance.bound));
      const McMoments mcfe = mc_estimators(mcrb_ev.mcfe_output_sweep(mu));
      max_rel_err = std::max(max_rel_err, std::abs(ms.expectation.corrected_value - mcfe.mean) /
                                              std::abs(mcfe.mean));
      max_rel_err =
          std::max(max_rel_err, std::abs(ms.variance.corrected_value - mcfe.variance) /
                                    std::abs(mcfe.variance));

      const SgrbChain chain = sgrb_ev.solve_chain(mu, sgrb_off.rom.R_max);
      const auto res = sgrb_ev.assemble_residuals(chain, mu, sgrb_off.rom.R_max);
      for (const Vector* r : {&res.primal, &res.dual1, &res.dual2, &res.dual3}) {
        max_resid = std::max(max_resid, sgrb_ev.riesz().dual_norm_blocked(*r));
      }
      const auto ss = sgrb_ev.statistics_with_bounds(mu, sgrb_off.rom.R_max);
      max_bound = std::max(max_bound, std::max(ss.expectation.bound, ss.variance.bound));
      const SgOutputMoments sgfe = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
      max_rel_err = std::max(max_rel_err, std::abs(ss.expectation.corrected_value - sgfe.mean) /
                                              std::abs(sgfe.mean));
      max_rel_err =
          std::max(max_rel_err, std::abs(ss.variance.corrected_value - sgfe.variance) /
                                    std::abs(sgfe.variance));
      if ((j + 1) % 16 == 0) timer.stage("  training point " + std::to_string(j + 1) + "/64 done");
    }
    report(3, "reproduction exactness at training parameters",
           max_resid <= 1e-8 && max_bound <= 1e-10 && max_rel_err <= 1e-8,
           "max residual dual norm " + fmt(max_resid) + " (<=1e-8), max bound " + fmt(max_bound) +
               " (<=1e-10), max relative statistic error " + fmt(max_rel_err) + " (<=1e-8)");
  }

  // ---- criterion 5: SG vs MC consistency ---------------------------------
  timer.stage("criterion 5: SG/MC consistency at 3 test parameters");
  {
    const SampleSet ref = draw_mc_samples(cfg.discretization.reference.n_mc_samples,
                                          cfg.model.kl_modes, cfg.discretization.reference.mc_seed);
    bool ok = true;
    std::string detail;
    for (int p = 0; p < 3; ++p) {
      const Eigen::Vector2d mu = test.row(p).transpose();
      const Vector lu = mcfe_output_sweep(assets.ops, ref, mu);
      const McMoments mc = mc_estimators(lu);
      const SgOutputMoments sg = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
      const double se_mean = std::sqrt(mc.variance / ref.N_xi);
      const double m2 = lu.squaredNorm() / ref.N_xi - mc.mean * mc.mean;
      const double m4 = (lu.array() - mc.mean).pow(4).sum() / ref.N_xi;
      const double se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / ref.N_xi);
      const double dev_mean = std::abs(sg.mean - mc.mean) / se_mean;
      const double dev_var = std::abs(sg.variance - mc.variance) / se_var;
      ok = ok && dev_mean <= 4.0 && dev_var <= 8.0;
      if (p == 0) detail = "|dE|/se = " + fmt(dev_mean) + " (<=4), |dV|/se = " + fmt(dev_var) +
                           " (<=8)";
    }
    report(5, "SG/MC consistency", ok, detail + " at 3 test parameters");
  }

  // ---- criterion 8: sampling-free online contract -------------------------
  timer.stage("criterion 8: online cost of the SGRB query");
  {
    const int R = std::min(64, sgrb_off.rom.R_max);
    const std::uint64_t solves_before = sgrb_ev.reduced_solve_count();
    sgrb_ev.solve_chain(Eigen::Vector2d(12.5, -37.5), R); // warm up
    const std::uint64_t per_chain = sgrb_ev.reduced_solve_count() - solves_before;

    std::vector<double> times;
    for (int rep = 0; rep < 21; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      sgrb_ev.solve_chain(Eigen::Vector2d(12.5, -37.5), R);
      times.push_back(elapsed_since(t0));
    }
    std::sort(times.begin(), times.end());
    const double median_ms = 1e3 * times[times.size() / 2];

    const std::uint64_t mcrb_before = mcrb_ev.reduced_solve_count();
    mcrb_ev.statistics_with_bounds(Eigen::Vector2d(12.5, -37.5), std::min(64, mcrb_off.rom.R_max));
    const std::uint64_t mcrb_per_query = mcrb_ev.reduced_solve_count() - mcrb_before;

    const bool ok = (per_chain == 4) && (median_ms <= 10.0) &&
                    (mcrb_per_query >= 5ull * static_cast<std::uint64_t>(samples.N_xi));
    report(8, "sampling-free online contract", ok,
           "SGRB chain: " + std::to_string(per_chain) + " reduced solves, median " +
               fmt(median_ms) + " ms (<=10); MCRB query: " + std::to_string(mcrb_per_query) +
               " reduced solves (speed-up factor ~" +
               std::to_string(mcrb_per_query / std::max<std::uint64_t>(1, per_chain)) + ")");
  }

  // ---- criterion 9: parameter-dependent statistics surface ----------------
  timer.stage("criterion 9: SGFE statistics over the 21x21 parameter grid");
  {
    double e_min = 1e300, e_max = -1e300, v_min = 1e300, v_max = -1e300, e_origin = 0.0;
    for (int i = 0; i < 21; ++i) {
      for (int j = 0; j < 21; ++j) {
        const Eigen::Vector2d mu(cfg.model.mu_min + (cfg.model.mu_max - cfg.model.mu_min) * i / 20.0,
                                 cfg.model.mu_min + (cfg.model.mu_max - cfg.model.mu_min) * j / 20.0);
        const SgOutputMoments mom = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));
        e_min = std::min(e_min, mom.mean);
        e_max = std::max(e_max, mom.mean);
        v_min = std::min(v_min, mom.variance);
        v_max = std::max(v_max, mom.variance);
        if (i == 10 && j == 10) e_origin = mom.mean; // mu = (0,0)
      }
    }
    const bool origin_ok = e_origin >= 1.2e-4 && e_origin <= 2.5e-4;
    const bool ok =
        e_min >= 1.0e-4 && e_max <= 3.0e-4 && v_min >= 0.0 && v_max <= 2.5e-9 && origin_ok;
    report(9, "statistics surface within the published ranges", ok,
           "E in [" + fmt(e_min) + ", " + fmt(e_max) + "] (required [1e-4, 3e-4]); V in [" +
               fmt(v_min) + ", " + fmt(v_max) + "] (required [0, 2.5e-9]); E(0,0) = " +
               fmt(e_origin) + " (required [1.2e-4, 2.5e-4])");
  }

  // ---- criterion 10: fast validation suite through the CLI ----------------
  timer.stage("criterion 10: quick-profile offline + validate through the CLI");
  {
    const char* cli_env = std::getenv("RBUQ_CLI");
    const std::string cli = (cli_env && *cli_env) ? cli_env : "build/tools/rbuq_cli";
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rbuq_acceptance_quick";
    fs::create_directories(dir);
    const std::string artifact = (dir / "quick.rbuq").string();
    {
      std::ofstream cfg_file(dir / "quick.json");
      cfg_file << config_to_json(StudyConfig::quick()).dump(2);
    }
    const std::string log = (dir / "log.txt").string();
    const int off_rc = std::system((cli + " offline --config " + (dir / "quick.json").string() +
                                    " --artifact " + artifact + " > " + log + " 2>&1")
                                       .c_str());
    bool ok = (WIFEXITED(off_rc) && WEXITSTATUS(off_rc) == 0);
    double seconds = 0.0;
    if (ok) {
      const auto t0 = std::chrono::steady_clock::now();
      const int val_rc =
          std::system((cli + " validate --artifact " + artifact + " >> " + log + " 2>&1").c_str());
      seconds = elapsed_since(t0);
      ok = WIFEXITED(val_rc) && WEXITSTATUS(val_rc) == 0 && seconds < 60.0;
    }
    report(10, "quick validation suite", ok,
           ok ? ("validate passed in " + fmt(seconds) + " s (< 60 s)")
              : "offline or validate run failed (see " + log + ")");
    fs::remove_all(dir);
  }

  std::cout << "----------------------------------------------------------------\n";
  int failed = 0;
  for (const auto& r : g_results)
    if (!r.passed) ++failed;
  std::cout << (failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << ": "
            << (g_results.size() - failed) << "/" << g_results.size() << " criteria passed in "
            << fmt(elapsed_since(timer.t0)) << " s\n";
  return failed == 0 ? 0 : 1;
}
