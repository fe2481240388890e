#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rbuq/artifact.hpp"
#include "rbuq/config.hpp"
#include "rbuq/mcrb.hpp"
#include "rbuq/sgrb.hpp"

namespace rbuq {

/// Deterministic model data rebuilt from a configuration: mesh, KL
/// expansion, assembled operators and the SG system.
struct ModelAssets {
  Triangulation mesh;
  KlExpansion kl;
  AffineOperatorSet ops;
  SgSystem sg;
};

inline ModelAssets build_model_assets(const ModelConfig& model, int n_cells, int sg_degree) {
  ModelAssets assets;
  assets.mesh = build_mesh(n_cells);
  assets.kl = build_kl_2d(model.correlation_length, model.kl_modes);
  assets.ops = assemble_operators(assets.mesh, assets.kl, model.kappa0, model.sigma);
  assets.sg = build_sg_system(assets.ops, build_double_orthogonal_basis(sg_degree, model.kl_modes));
  return assets;
}

inline ModelAssets build_model_assets(const StudyConfig& cfg) {
  return build_model_assets(cfg.model, cfg.discretization.n_cells, cfg.discretization.sg_degree);
}

inline ModelAssets build_reference_assets(const StudyConfig& cfg) {
  return build_model_assets(cfg.model, cfg.discretization.reference.n_cells,
                            cfg.discretization.reference.sg_degree);
}

inline Matrix training_points(const StudyConfig& cfg) {
  Vector lo = Vector::Constant(2, cfg.model.mu_min);
  Vector hi = Vector::Constant(2, cfg.model.mu_max);
  return draw_uniform_points(cfg.discretization.n_train, lo, hi, cfg.discretization.train_seed);
}

inline Matrix testing_points(const StudyConfig& cfg) {
  Vector lo = Vector::Constant(2, cfg.model.mu_min);
  Vector hi = Vector::Constant(2, cfg.model.mu_max);
  return draw_uniform_points(cfg.discretization.n_test, lo, hi, cfg.discretization.test_seed);
}

/// Offline phase: builds the model, the sample set and both reduced-order
/// packages, and writes the artifact file. Errors abort with a phase tag.
inline OfflineArtifact cmd_offline(const StudyConfig& cfg, const std::string& artifact_path,
                                   std::ostream& log = std::cout) {
  cfg.validate();
  OfflineArtifact art;
  art.config = cfg;

  auto phase = [&log](const char* name) -> const char* {
    log << "[offline] " << name << "\n" << std::flush;
    return name;
  };

  const char* current = phase("building model operators");
  try {
    ModelAssets assets = build_model_assets(cfg);

    current = phase("drawing MC sample set");
    art.samples = draw_mc_samples(cfg.discretization.n_mc_samples, cfg.model.kl_modes,
                                  cfg.discretization.mc_seed);
    const Matrix train = training_points(cfg);

    current = phase("MCRB snapshots and POD spaces");
    McrbOfflineOptions mopt;
    mopt.r_max = cfg.run.r_max;
    mopt.snapshot_xi_count = cfg.run.snapshot_xi_count;
    art.mcrb = build_mcrb_offline(assets.ops, art.samples, train, mopt).rom;

    current = phase("SGRB snapshots and POD spaces");
    SgrbOfflineOptions sopt;
    sopt.r_max = cfg.run.r_max;
    art.sgrb = build_sgrb_offline(assets.sg, train, sopt).rom;

    current = phase("writing artifact");
    save_artifact(artifact_path, art);
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError& err) {
    throw IoError(std::string("offline phase '") + current + "' failed: " + err.what());
  } catch (const std::exception& err) {
    throw SolverError(std::string("offline phase '") + current + "' failed: " + err.what());
  }

  log << "[offline] done: M_FE=" << art.mcrb.bases[0].rows() << " M_SG=" << art.sgrb.M_SG
      << " mcrb_R_max=" << art.mcrb.R_max << " sgrb_R_max=" << art.sgrb.R_max << "\n";
  return art;
}

namespace detail {

inline nlohmann::json estimate_to_json(const McEstimate& est) {
  nlohmann::json j;
  j["value"] = est.value;
  j["corrected_value"] = est.corrected_value;
  j["bound"] = est.bound;
  j["components"] = est.components;
  return j;
}

inline std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

} // namespace detail

/// Single-query evaluation: corrected estimates, bounds and bound
/// components of both models at (mu, R), plus the online cost counters of
/// the sampling-free SGRB path.
inline nlohmann::json cmd_evaluate(const OfflineArtifact& art, const ModelAssets& assets,
                                   const Eigen::Vector2d& mu, int R) {
  const StudyConfig& cfg = art.config;
  if (R < 1 || R > std::max(art.mcrb.R_max, art.sgrb.R_max))
    throw ConfigError("evaluate: R must lie in [1, R_max]");
  if (mu(0) < cfg.model.mu_min || mu(0) > cfg.model.mu_max || mu(1) < cfg.model.mu_min ||
      mu(1) > cfg.model.mu_max) {
    std::cerr << "[evaluate] warning: mu outside the parameter domain (extrapolation)\n";
  }

  const McrbEvaluator mcrb_ev(assets.ops, art.mcrb, art.samples);
  const SgrbEvaluator sgrb_ev(assets.sg, art.sgrb);

  const auto mcrb_stats = mcrb_ev.statistics_with_bounds(mu, std::min(R, art.mcrb.R_max));
  const std::uint64_t mcrb_solves = mcrb_ev.reduced_solve_count();

  // time the sampling-free reduced chain separately from the full-order
  // bound assembly
  const int R_sg = std::min(R, art.sgrb.R_max);
  const auto t0 = std::chrono::steady_clock::now();
  sgrb_ev.solve_chain(mu, R_sg);
  const auto t1 = std::chrono::steady_clock::now();
  const std::uint64_t sgrb_chain_solves = sgrb_ev.reduced_solve_count();
  const auto sgrb_stats = sgrb_ev.statistics_with_bounds(mu, R_sg);

  nlohmann::json record;
  record["mu"] = {mu(0), mu(1)};
  record["R"] = R;
  record["mcrb"] = {{"expectation", detail::estimate_to_json(mcrb_stats.expectation)},
                    {"variance", detail::estimate_to_json(mcrb_stats.variance)}};
  record["sgrb"] = {{"expectation", detail::estimate_to_json(sgrb_stats.expectation)},
                    {"variance", detail::estimate_to_json(sgrb_stats.variance)}};
  record["online_cost"] = {
      {"sgrb_chain_seconds", std::chrono::duration<double>(t1 - t0).count()},
      {"sgrb_reduced_solves_per_query", sgrb_chain_solves},
      {"mcrb_reduced_solves_per_query", mcrb_solves}};
  return record;
}

/// One row of a convergence table.
struct ConvergenceRow {
  int R = 0;
  double error = 0.0;
  double bound = 0.0;
};

struct ConvergenceTables {
  std::vector<ConvergenceRow> expectation_mcrb, variance_mcrb, expectation_sgrb, variance_sgrb;
};

/// Errors and bounds versus the full-order models over the requested
/// reduced dimensions; `pointwise` evaluates at one mu, `l2` takes the
/// root-mean-square over the test parameter set.
inline ConvergenceTables compute_convergence(const OfflineArtifact& art, const ModelAssets& assets,
                                             const std::vector<int>& r_values,
                                             const Matrix& mu_points, std::ostream& log) {
  const McrbEvaluator mcrb_ev(assets.ops, art.mcrb, art.samples);
  const SgrbEvaluator sgrb_ev(assets.sg, art.sgrb);
  const int n_mu = static_cast<int>(mu_points.rows());
  const int n_r = static_cast<int>(r_values.size());

  Matrix err_em = Matrix::Zero(n_r, n_mu), bnd_em = Matrix::Zero(n_r, n_mu);
  Matrix err_vm = Matrix::Zero(n_r, n_mu), bnd_vm = Matrix::Zero(n_r, n_mu);
  Matrix err_es = Matrix::Zero(n_r, n_mu), bnd_es = Matrix::Zero(n_r, n_mu);
  Matrix err_vs = Matrix::Zero(n_r, n_mu), bnd_vs = Matrix::Zero(n_r, n_mu);

  for (int p = 0; p < n_mu; ++p) {
    const Eigen::Vector2d mu = mu_points.row(p).transpose();
    log << "[convergence] mu point " << (p + 1) << "/" << n_mu << "\n" << std::flush;

    const McMoments mcfe = mc_estimators(mcrb_ev.mcfe_output_sweep(mu));
    const SgOutputMoments sgfe = sg_output_moments(assets.sg, solve_sgfe(assets.sg, mu));

    for (int ri = 0; ri < n_r; ++ri) {
      const int R = r_values[static_cast<std::size_t>(ri)];
      const auto ms = mcrb_ev.statistics_with_bounds(mu, std::min(R, art.mcrb.R_max));
      err_em(ri, p) = std::abs(mcfe.mean - ms.expectation.corrected_value);
      bnd_em(ri, p) = ms.expectation.bound;
      err_vm(ri, p) = std::abs(mcfe.variance - ms.variance.corrected_value);
      bnd_vm(ri, p) = ms.variance.bound;

      const auto ss = sgrb_ev.statistics_with_bounds(mu, std::min(R, art.sgrb.R_max));
      err_es(ri, p) = std::abs(sgfe.mean - ss.expectation.corrected_value);
      bnd_es(ri, p) = ss.expectation.bound;
      err_vs(ri, p) = std::abs(sgfe.variance - ss.variance.corrected_value);
      bnd_vs(ri, p) = ss.variance.bound;
    }
  }

  auto reduce = [&](const Matrix& err, const Matrix& bnd) {
    std::vector<ConvergenceRow> rows;
    for (int ri = 0; ri < n_r; ++ri) {
      ConvergenceRow row;
      row.R = r_values[static_cast<std::size_t>(ri)];
      row.error = std::sqrt(err.row(ri).squaredNorm() / n_mu);
      row.bound = std::sqrt(bnd.row(ri).squaredNorm() / n_mu);
      rows.push_back(row);
    }
    return rows;
  };

  ConvergenceTables tables;
  tables.expectation_mcrb = reduce(err_em, bnd_em);
  tables.variance_mcrb = reduce(err_vm, bnd_vm);
  tables.expectation_sgrb = reduce(err_es, bnd_es);
  tables.variance_sgrb = reduce(err_vs, bnd_vs);
  return tables;
}

inline void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("convergence: cannot write '" + path + "'");
  out << "R,Error,Bound\n";
  for (const auto& row : rows) {
    out << row.R << ',' << detail::format_g17(row.error) << ',' << detail::format_g17(row.bound)
        << '\n';
  }
}

/// Runs the convergence study and writes the four CSV tables
/// (expectation/variance x MCRB/SGRB) into out_dir.
inline ConvergenceTables cmd_convergence(const OfflineArtifact& art, const ModelAssets& assets,
                                         const std::string& mode,
                                         const std::optional<Eigen::Vector2d>& mu_opt,
                                         const std::string& out_dir,
                                         std::ostream& log = std::cout) {
  Matrix mu_points;
  if (mode == "pointwise") {
    Eigen::Vector2d mu =
        mu_opt ? *mu_opt : Eigen::Vector2d(testing_points(art.config).row(0).transpose());
    mu_points = mu.transpose();
  } else if (mode == "l2") {
    mu_points = testing_points(art.config);
  } else {
    throw ConfigError("convergence: mode must be 'pointwise' or 'l2'");
  }

  const ConvergenceTables tables =
      compute_convergence(art, assets, art.config.run.r_values, mu_points, log);

  std::filesystem::create_directories(out_dir);
  write_convergence_csv(tables.expectation_mcrb, out_dir + "/expectation_mcrb.csv");
  write_convergence_csv(tables.variance_mcrb, out_dir + "/variance_mcrb.csv");
  write_convergence_csv(tables.expectation_sgrb, out_dir + "/expectation_sgrb.csv");
  write_convergence_csv(tables.variance_sgrb, out_dir + "/variance_sgrb.csv");
  log << "[convergence] wrote 4 tables to " << out_dir << "\n";
  return tables;
}

} // namespace rbuq
