#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbuq/types.hpp"

namespace rbuq {

/// Model parameters (defaults: the production test problem).
struct ModelConfig {
  double kappa0 = -1000.0;          // expected reactivity
  double sigma = 200.0;             // reactivity standard deviation
  double correlation_length = 1.0;  // L
  int kl_modes = 5;                 // K
  double mu_min = -200.0;           // P = [mu_min, mu_max]^2
  double mu_max = 200.0;
};

/// Reference discretization used to estimate discretization errors.
struct ReferenceConfig {
  int n_cells = 32;
  int n_mc_samples = 16384;
  int sg_degree = 3;
  std::uint64_t mc_seed = 52803;
};

/// Discretization parameters; seeds are always explicit.
struct DiscretizationConfig {
  int n_cells = 16;       // M_FE = (n_cells - 1)^2 = 225
  int n_mc_samples = 1024;
  int sg_degree = 2;      // M_SG = (d+1)^K = 243
  int n_train = 64;
  int n_test = 64;
  std::uint64_t mc_seed = 90210;
  std::uint64_t train_seed = 4821;
  std::uint64_t test_seed = 77001;
  ReferenceConfig reference;
};

struct RunConfig {
  std::vector<int> r_values = {1, 2, 4, 8, 16, 32, 64};
  int r_max = 0;             // 0: keep the numerical rank of each snapshot set
  int snapshot_xi_count = 0; // 0: full snapshot grid
  std::string output_dir = "out";
};

struct StudyConfig {
  ModelConfig model;
  DiscretizationConfig discretization;
  RunConfig run;

  static StudyConfig defaults() { return {}; }

  /// Scaled-down profile for smoke runs and the fast validation suite.
  static StudyConfig quick() {
    StudyConfig cfg;
    cfg.discretization.n_cells = 8;
    cfg.discretization.n_mc_samples = 64;
    cfg.discretization.n_train = 8;
    cfg.discretization.n_test = 8;
    cfg.discretization.reference = {16, 2048, 2, 52803};
    cfg.run.r_values = {1, 2, 4, 8};
    return cfg;
  }

  void validate() const {
    if (discretization.n_cells < 2 || discretization.n_cells % 2 != 0)
      throw ConfigError("config: discretization.n_cells must be even and >= 2");
    if (discretization.n_mc_samples < 2)
      throw ConfigError("config: discretization.n_mc_samples must be >= 2");
    if (discretization.sg_degree < 0) throw ConfigError("config: sg_degree must be >= 0");
    if (discretization.n_train < 1) throw ConfigError("config: n_train must be >= 1");
    if (discretization.n_test < 1) throw ConfigError("config: n_test must be >= 1");
    if (model.kl_modes < 1) throw ConfigError("config: model.kl_modes must be >= 1");
    if (!(model.correlation_length > 0.0))
      throw ConfigError("config: model.correlation_length must be positive");
    if (!(model.mu_min < model.mu_max))
      throw ConfigError("config: model.mu_min must be below model.mu_max");
    if (run.r_values.empty()) throw ConfigError("config: run.r_values must not be empty");
    for (int r : run.r_values)
      if (r < 1) throw ConfigError("config: run.r_values entries must be >= 1");
    if (run.snapshot_xi_count < 0 || run.snapshot_xi_count > discretization.n_mc_samples)
      throw ConfigError("config: run.snapshot_xi_count out of range");
  }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void maybe(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace detail

inline StudyConfig config_from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  detail::require_keys(j, {"model", "discretization", "run"}, "top level");

  if (j.contains("model")) {
    const auto& m = j.at("model");
    detail::require_keys(
        m, {"kappa0", "sigma", "correlation_length", "kl_modes", "mu_min", "mu_max"}, "model");
    detail::maybe(m, "kappa0", cfg.model.kappa0);
    detail::maybe(m, "sigma", cfg.model.sigma);
    detail::maybe(m, "correlation_length", cfg.model.correlation_length);
    detail::maybe(m, "kl_modes", cfg.model.kl_modes);
    detail::maybe(m, "mu_min", cfg.model.mu_min);
    detail::maybe(m, "mu_max", cfg.model.mu_max);
  }
  if (j.contains("discretization")) {
    const auto& d = j.at("discretization");
    detail::require_keys(d,
                         {"n_cells", "n_mc_samples", "sg_degree", "n_train", "n_test", "mc_seed",
                          "train_seed", "test_seed", "reference"},
                         "discretization");
    detail::maybe(d, "n_cells", cfg.discretization.n_cells);
    detail::maybe(d, "n_mc_samples", cfg.discretization.n_mc_samples);
    detail::maybe(d, "sg_degree", cfg.discretization.sg_degree);
    detail::maybe(d, "n_train", cfg.discretization.n_train);
    detail::maybe(d, "n_test", cfg.discretization.n_test);
    detail::maybe(d, "mc_seed", cfg.discretization.mc_seed);
    detail::maybe(d, "train_seed", cfg.discretization.train_seed);
    detail::maybe(d, "test_seed", cfg.discretization.test_seed);
    if (d.contains("reference")) {
      const auto& r = d.at("reference");
      detail::require_keys(r, {"n_cells", "n_mc_samples", "sg_degree", "mc_seed"},
                           "discretization.reference");
      detail::maybe(r, "n_cells", cfg.discretization.reference.n_cells);
      detail::maybe(r, "n_mc_samples", cfg.discretization.reference.n_mc_samples);
      detail::maybe(r, "sg_degree", cfg.discretization.reference.sg_degree);
      detail::maybe(r, "mc_seed", cfg.discretization.reference.mc_seed);
    }
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    detail::require_keys(r, {"r_values", "r_max", "snapshot_xi_count", "output_dir"}, "run");
    detail::maybe(r, "r_values", cfg.run.r_values);
    detail::maybe(r, "r_max", cfg.run.r_max);
    detail::maybe(r, "snapshot_xi_count", cfg.run.snapshot_xi_count);
    detail::maybe(r, "output_dir", cfg.run.output_dir);
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const StudyConfig& cfg) {
  nlohmann::json j;
  j["model"] = {{"kappa0", cfg.model.kappa0},
                {"sigma", cfg.model.sigma},
                {"correlation_length", cfg.model.correlation_length},
                {"kl_modes", cfg.model.kl_modes},
                {"mu_min", cfg.model.mu_min},
                {"mu_max", cfg.model.mu_max}};
  j["discretization"] = {{"n_cells", cfg.discretization.n_cells},
                         {"n_mc_samples", cfg.discretization.n_mc_samples},
                         {"sg_degree", cfg.discretization.sg_degree},
                         {"n_train", cfg.discretization.n_train},
                         {"n_test", cfg.discretization.n_test},
                         {"mc_seed", cfg.discretization.mc_seed},
                         {"train_seed", cfg.discretization.train_seed},
                         {"test_seed", cfg.discretization.test_seed},
                         {"reference",
                          {{"n_cells", cfg.discretization.reference.n_cells},
                           {"n_mc_samples", cfg.discretization.reference.n_mc_samples},
                           {"sg_degree", cfg.discretization.reference.sg_degree},
                           {"mc_seed", cfg.discretization.reference.mc_seed}}}};
  j["run"] = {{"r_values", cfg.run.r_values},
              {"r_max", cfg.run.r_max},
              {"snapshot_xi_count", cfg.run.snapshot_xi_count},
              {"output_dir", cfg.run.output_dir}};
  return j;
}

inline StudyConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("config: parse error in '" + path + "': " + err.what());
  }
  return config_from_json(j);
}

} // namespace rbuq
