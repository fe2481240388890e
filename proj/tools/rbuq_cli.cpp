// Command-line driver: offline model construction, single-query evaluation,
// convergence studies and the validation suite for the reduced-basis
// statistics toolkit.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbuq/drivers.hpp"
#include "rbuq/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

rbuq::StudyConfig resolve_config(const std::string& config_path,
                                 std::optional<std::uint64_t> seed_override) {
  rbuq::StudyConfig cfg =
      config_path.empty() ? rbuq::StudyConfig::defaults() : rbuq::load_config_file(config_path);
  if (seed_override) cfg.discretization.mc_seed = *seed_override;
  cfg.validate();
  return cfg;
}

struct LoadedArtifact {
  rbuq::OfflineArtifact artifact;
  rbuq::ModelAssets assets;
};

LoadedArtifact load_with_assets(const std::string& artifact_path) {
  LoadedArtifact loaded{rbuq::load_artifact(artifact_path), {}};
  loaded.assets = rbuq::build_model_assets(loaded.artifact.config);
  return loaded;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rbuq - certified reduced-basis statistics for a parametrized elliptic problem"};
  app.require_subcommand(1);

  std::string config_path, artifact_path, out_dir = "out", mode = "pointwise";
  std::vector<double> mu_flag;
  int R = 0;
  std::optional<std::uint64_t> seed_override;

  CLI::App* offline = app.add_subcommand("offline", "build the reduced-order models");
  offline->add_option("--artifact", artifact_path, "artifact output path")->required();
  offline->add_option("--config", config_path, "study configuration (JSON)");
  offline->add_option("--seed-override", seed_override, "override the MC sample seed");

  CLI::App* evaluate = app.add_subcommand("evaluate", "estimate statistics at one parameter");
  evaluate->add_option("--artifact", artifact_path, "artifact file")->required();
  evaluate->add_option("--mu", mu_flag, "deterministic parameter (two values)")
      ->expected(2)
      ->required();
  evaluate->add_option("--R", R, "reduced dimension")->required();

  CLI::App* convergence =
      app.add_subcommand("convergence", "error/bound tables over reduced dimensions");
  convergence->add_option("--artifact", artifact_path, "artifact file")->required();
  convergence->add_option("--mode", mode, "pointwise|l2")
      ->check(CLI::IsMember({"pointwise", "l2"}));
  convergence->add_option("--mu", mu_flag, "parameter for pointwise mode")->expected(2);
  convergence->add_option("--out", out_dir, "output directory for CSV tables");

  CLI::App* validate = app.add_subcommand("validate", "run the invariant suites");
  validate->add_option("--artifact", artifact_path, "artifact file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (offline->parsed()) {
      const rbuq::StudyConfig cfg = resolve_config(config_path, seed_override);
      rbuq::cmd_offline(cfg, artifact_path);
      return kExitOk;
    }
    if (evaluate->parsed()) {
      const LoadedArtifact loaded = load_with_assets(artifact_path);
      const Eigen::Vector2d mu(mu_flag[0], mu_flag[1]);
      const nlohmann::json record = rbuq::cmd_evaluate(loaded.artifact, loaded.assets, mu, R);
      std::cout << record.dump(2) << "\n";
      return kExitOk;
    }
    if (convergence->parsed()) {
      const LoadedArtifact loaded = load_with_assets(artifact_path);
      std::optional<Eigen::Vector2d> mu_opt;
      if (mu_flag.size() == 2) mu_opt = Eigen::Vector2d(mu_flag[0], mu_flag[1]);
      rbuq::cmd_convergence(loaded.artifact, loaded.assets, mode, mu_opt, out_dir);
      return kExitOk;
    }
    if (validate->parsed()) {
      const LoadedArtifact loaded = load_with_assets(artifact_path);
      const rbuq::ValidationReport report = rbuq::cmd_validate(loaded.artifact, loaded.assets);
      if (!report.all_passed()) {
        std::cerr << "validation failed\n";
        return kExitValidationFailure;
      }
      std::cout << "all " << report.checks.size() << " checks passed\n";
      return kExitOk;
    }
  } catch (const rbuq::ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const rbuq::IoError& err) {
    std::cerr << "artifact error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const rbuq::ModelError& err) {
    std::cerr << "model failure: " << err.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}
