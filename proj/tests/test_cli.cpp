#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

// End-to-end exercises of the command-line tool; the binary path comes from
// the RBUQ_CLI environment variable set by CTest.

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("RBUQ_CLI");
  if (env && *env) return env;
  return "build/tools/rbuq_cli"; // fallback for manual runs from the repo root
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "cli_output.txt";
  const std::string cmd = cli_path() + " " + args + " > " + out_file.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

struct CliFixture {
  fs::path dir;
  std::string artifact;

  CliFixture() {
    dir = fs::temp_directory_path() / ("rbuq_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    artifact = (dir / "model.rbuq").string();
    std::ofstream cfg(dir / "config.json");
    cfg << R"({
      "model": {"kl_modes": 2},
      "discretization": {"n_cells": 4, "n_mc_samples": 16, "sg_degree": 1,
                         "n_train": 3, "n_test": 3,
                         "reference": {"n_cells": 8, "n_mc_samples": 256, "sg_degree": 1}},
      "run": {"r_values": [1, 2, 3]}
    })";
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string config() const { return (dir / "config.json").string(); }
};

} // namespace

TEST_CASE("cli offline/evaluate/convergence/validate round trip", "[cli]") {
  CliFixture fx;

  const CliResult off =
      run_cli("offline --config " + fx.config() + " --artifact " + fx.artifact, fx.dir);
  CAPTURE(off.output);
  REQUIRE(off.exit_code == 0);
  REQUIRE(fs::exists(fx.artifact));

  SECTION("evaluate emits a well-formed record") {
    const CliResult ev =
        run_cli("evaluate --artifact " + fx.artifact + " --mu 10 -20 --R 2", fx.dir);
    CAPTURE(ev.output);
    REQUIRE(ev.exit_code == 0);
    const auto rec = nlohmann::json::parse(ev.output);
    REQUIRE(rec["R"] == 2);
    REQUIRE(rec["mcrb"]["expectation"].contains("corrected_value"));
    REQUIRE(rec["sgrb"]["variance"]["bound"].get<double>() >= 0.0);
  }

  SECTION("evaluate warns on extrapolation but succeeds") {
    const CliResult ev =
        run_cli("evaluate --artifact " + fx.artifact + " --mu 500 0 --R 1", fx.dir);
    REQUIRE(ev.exit_code == 0);
    REQUIRE(ev.output.find("extrapolation") != std::string::npos);
  }

  SECTION("evaluate rejects an out-of-range reduced dimension") {
    const CliResult ev =
        run_cli("evaluate --artifact " + fx.artifact + " --mu 0 0 --R 400", fx.dir);
    REQUIRE(ev.exit_code == 2);
  }

  SECTION("convergence tables are written and byte-stable") {
    const std::string out1 = (fx.dir / "conv1").string();
    const std::string out2 = (fx.dir / "conv2").string();
    const CliResult c1 = run_cli(
        "convergence --artifact " + fx.artifact + " --mode pointwise --mu 25 -75 --out " + out1,
        fx.dir);
    CAPTURE(c1.output);
    REQUIRE(c1.exit_code == 0);
    const CliResult c2 = run_cli(
        "convergence --artifact " + fx.artifact + " --mode pointwise --mu 25 -75 --out " + out2,
        fx.dir);
    REQUIRE(c2.exit_code == 0);

    for (const char* name : {"expectation_mcrb.csv", "variance_mcrb.csv", "expectation_sgrb.csv",
                             "variance_sgrb.csv"}) {
      std::ifstream a(fs::path(out1) / name), b(fs::path(out2) / name);
      REQUIRE(a.good());
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      REQUIRE(sa.str() == sb.str()); // identical bytes
      REQUIRE(sa.str().rfind("R,Error,Bound\n", 0) == 0);
    }
  }

  SECTION("l2 mode runs over the test set") {
    const std::string out = (fx.dir / "conv_l2").string();
    const CliResult c = run_cli(
        "convergence --artifact " + fx.artifact + " --mode l2 --out " + out, fx.dir);
    REQUIRE(c.exit_code == 0);
    std::ifstream csv(fs::path(out) / "variance_sgrb.csv");
    int lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    REQUIRE(lines == 4); // header + 3 ranks
  }

  SECTION("validate passes on the fresh artifact") {
    const CliResult v = run_cli("validate --artifact " + fx.artifact, fx.dir);
    CAPTURE(v.output);
    REQUIRE(v.exit_code == 0);
    REQUIRE(v.output.find("[FAIL]") == std::string::npos);
  }
}

TEST_CASE("cli error handling uses the documented exit codes", "[cli]") {
  CliFixture fx;

  // unknown config key -> configuration error (2)
  std::ofstream bad(fx.dir / "bad.json");
  bad << R"({"model": {"kappa_zero": 1.0}})";
  bad.close();
  const CliResult r1 = run_cli(
      "offline --config " + (fx.dir / "bad.json").string() + " --artifact " + fx.artifact, fx.dir);
  REQUIRE(r1.exit_code == 2);
  REQUIRE(r1.output.find("unknown key") != std::string::npos);

  // missing artifact -> configuration error (2)
  const CliResult r2 =
      run_cli("evaluate --artifact " + (fx.dir / "missing.rbuq").string() + " --mu 0 0 --R 1",
              fx.dir);
  REQUIRE(r2.exit_code == 2);

  // odd mesh size -> configuration error (2)
  std::ofstream odd(fx.dir / "odd.json");
  odd << R"({"discretization": {"n_cells": 5}})";
  odd.close();
  const CliResult r3 = run_cli(
      "offline --config " + (fx.dir / "odd.json").string() + " --artifact " + fx.artifact, fx.dir);
  REQUIRE(r3.exit_code == 2);
}

TEST_CASE("cli offline seed override changes the sample block deterministically", "[cli]") {
  CliFixture fx;
  const std::string art2 = (fx.dir / "model2.rbuq").string();
  const std::string art3 = (fx.dir / "model3.rbuq").string();

  REQUIRE(run_cli("offline --config " + fx.config() + " --artifact " + fx.artifact, fx.dir)
              .exit_code == 0);
  REQUIRE(run_cli("offline --config " + fx.config() + " --artifact " + art2 + " --seed-override 99",
                  fx.dir)
              .exit_code == 0);
  REQUIRE(run_cli("offline --config " + fx.config() + " --artifact " + art3 + " --seed-override 99",
                  fx.dir)
              .exit_code == 0);

  // same seed twice -> byte-identical artifacts; different seed -> different
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  REQUIRE(slurp(art2) == slurp(art3));
  REQUIRE(slurp(fx.artifact) != slurp(art2));
}
