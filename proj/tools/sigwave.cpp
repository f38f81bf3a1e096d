// Command-line front end: one subcommand per experiment.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "sigwave/config.hpp"
#include "sigwave/dynamics.hpp"
#include "sigwave/experiments.hpp"
#include "sigwave/parallel.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

sigwave::ExperimentConfig resolve(const Options& opt) {
  sigwave::ExperimentConfig cfg =
      opt.config.empty() ? sigwave::ExperimentConfig() : sigwave::ExperimentConfig::from_file(opt.config);
  if (opt.seed) cfg.set("experiment.seed", std::to_string(*opt.seed));
  if (opt.out) cfg.set("output.dir", *opt.out);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulations of the hyperbolic O(N) linear sigma model on the 2-torus."};
  app.require_subcommand(1);
  app.footer("Configuration keys (INI sections [grid], [truncation], ...; unknown keys are errors):\n" +
             sigwave::config_help() + "\nThreads: --threads or SIGMA_WAVE_THREADS; outputs do not depend on it.");

  using Command = std::function<sigwave::CommandResult(const sigwave::ExperimentConfig&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"renorm-table", {"tabulate sigma_M(t) and alpha_M", sigwave::cmd_renorm_table}},
      {"simulate-hlsm", {"integrate the renormalized O(N) system", sigwave::cmd_simulate_hlsm}},
      {"simulate-meanfield", {"integrate the replica mean-field system", sigwave::cmd_simulate_meanfield}},
      {"convergence-rate", {"N sweep of the Gibbs-data distance to the limit", sigwave::cmd_convergence_rate}},
      {"lln-decay", {"N sweep of averaged Wick powers", sigwave::cmd_lln_decay}},
      {"sample-gibbs", {"run the Gibbs sampler", sigwave::cmd_sample_gibbs}},
      {"invariance-check", {"evolve Gibbs samples and compare laws", sigwave::cmd_invariance}},
      {"commutator", {"commutator defect sweep over M", sigwave::cmd_commutator}},
  };

  Options opt;
  std::string chosen;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opt.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "root seed (overrides experiment.seed)");
    sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("--threads", opt.threads, "worker threads (overrides SIGMA_WAVE_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt.threads) sigwave::set_thread_count(*opt.threads);
    const sigwave::ExperimentConfig cfg = resolve(opt);
    const sigwave::CommandResult res = commands.at(chosen).second(cfg);
    for (const auto& f : res.outputs) std::cout << (res.dir / f).string() << '\n';
    std::cout << (res.dir / "manifest.json").string() << '\n';
    for (const auto& [k, v] : res.results) std::cout << k << " = " << v << '\n';
    if (!res.warning.empty()) std::cerr << "warning: " << res.warning << '\n';
  } catch (const sigwave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const sigwave::BlowupError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
