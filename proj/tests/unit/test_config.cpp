#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sigwave/config.hpp"
#include "sigwave/experiments.hpp"

using namespace sigwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sigwave_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int status = -1;
  std::string output;
};

// Runs the command line tool with stderr folded into stdout.
Run run_cli(const std::string& args) {
  const std::string cmd = std::string(SIGWAVE_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST_CASE("defaults cover every key") {
  const ExperimentConfig cfg;
  CHECK(cfg.values().size() == config_keys().size());
  for (const auto& k : config_keys()) CHECK(cfg.raw(k.name) == k.default_value);
  CHECK(cfg.get_size("grid.n_grid") == 32);
  CHECK(cfg.get_bool("dynamics.dealias"));
  CHECK(cfg.get_size_list("experiment.N_list") == std::vector<std::size_t>{4, 16, 64, 256});
}

TEST_CASE("parsing and rejection") {
  const ExperimentConfig cfg = ExperimentConfig::from_string("[grid]\nn_grid = 64\n[dynamics]\nN = 7\ndt=0.005\n");
  CHECK(cfg.get_size("grid.n_grid") == 64);
  CHECK(cfg.get_size("dynamics.N") == 7);
  CHECK(cfg.get_double("dynamics.dt") == 0.005);

  CHECK_THROWS_WITH_AS(ExperimentConfig::from_string("[grid]\nbogus = 1\n"), doctest::Contains("grid.bogus"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_string("[nowhere]\nN = 1\n"), doctest::Contains("nowhere.N"),
                       ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_string("[grid\nn_grid = 4\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_string("n_grid = 4\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/sigwave.ini"), ConfigError);

  ExperimentConfig bad;
  bad.set("experiment.N_list", "");
  CHECK_THROWS_WITH_AS(bad.get_size_list("experiment.N_list"), doctest::Contains("experiment.N_list"), ConfigError);
  bad.set("experiment.N_list", "4,,16");
  CHECK_THROWS_AS(bad.get_size_list("experiment.N_list"), ConfigError);
  bad.set("dynamics.dt", "fast");
  CHECK_THROWS_WITH_AS(bad.get_double("dynamics.dt"), doctest::Contains("dynamics.dt"), ConfigError);
  bad.set("dynamics.dealias", "maybe");
  CHECK_THROWS_AS(bad.get_bool("dynamics.dealias"), ConfigError);
  CHECK_THROWS_AS(bad.set("dynamics.missing", "1"), ConfigError);
}

TEST_CASE("canonical text and hash") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  ExperimentConfig cfg;
  const std::string text = cfg.canonical_text();
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  CHECK(lines.size() == config_keys().size());
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  CHECK(cfg.hash() == sha256_hex(text));

  const std::string before = cfg.hash();
  cfg.set("experiment.seed", "1");
  CHECK(cfg.hash() != before);
  cfg.set("experiment.seed", "0");
  CHECK(cfg.hash() == before);
  // Key order in the file does not matter.
  CHECK(ExperimentConfig::from_string("[grid]\nm = 2\nn_grid = 8\n").hash() ==
        ExperimentConfig::from_string("[grid]\nn_grid = 8\nm = 2\n").hash());
}

TEST_CASE("reruns write identical tables and manifests") {
  const fs::path dir = scratch("renorm");
  ExperimentConfig cfg;
  cfg.set("output.dir", dir.string());
  cfg.set("experiment.t_max", "2");
  cfg.set("truncation.M", "4");
  const CommandResult first = cmd_renorm_table(cfg);
  REQUIRE(first.outputs == std::vector<std::string>{"renorm_table.csv"});
  const std::string csv = slurp(dir / "renorm_table.csv");
  const std::string manifest = slurp(dir / "manifest.json");
  cmd_renorm_table(cfg);
  CHECK(slurp(dir / "renorm_table.csv") == csv);
  CHECK(slurp(dir / "manifest.json") == manifest);
  CHECK(manifest.find(cfg.hash()) != std::string::npos);
  CHECK(manifest.find("\"renorm-table\"") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  fs::remove_all(dir);
}

TEST_CASE("command line tool") {
  const Run help = run_cli("--help");
  CHECK(help.status == 0);
  for (const auto& k : config_keys()) CHECK_MESSAGE(help.output.find(k.name) != std::string::npos, k.name);
  for (const char* sub : {"renorm-table", "simulate-hlsm", "simulate-meanfield", "convergence-rate", "lln-decay",
                          "sample-gibbs", "invariance-check", "commutator"}) {
    CHECK(help.output.find(sub) != std::string::npos);
  }
  CHECK(run_cli("").status != 0);

  const fs::path dir = scratch("cli");
  {
    std::ofstream(dir / "bad.ini") << "[grid]\nbogus = 3\n";
    std::ofstream(dir / "good.ini") << "[experiment]\nt_max = 1\n[truncation]\nM = 2\n";
  }
  const Run bad = run_cli("renorm-table --config " + (dir / "bad.ini").string());
  CHECK(bad.status == 2);
  CHECK(bad.output.find("grid.bogus") != std::string::npos);

  const fs::path out = dir / "out";
  const Run good = run_cli("renorm-table --config " + (dir / "good.ini").string() + " --out " + out.string());
  CHECK(good.status == 0);
  CHECK(fs::exists(out / "renorm_table.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(good.output.find("alpha_M = ") != std::string::npos);
  fs::remove_all(dir);
}
