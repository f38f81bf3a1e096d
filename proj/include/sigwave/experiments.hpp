#pragma once

// Experiment runners behind the command-line subcommands. Each command reads
// an ExperimentConfig, writes CSV tables (plus optional snapshots) and a
// manifest into output.dir, and returns the headline numbers.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sigwave/config.hpp"
#include "sigwave/diagnostics.hpp"
#include "sigwave/gibbs.hpp"

namespace sigwave {

struct CommandResult {
  std::filesystem::path dir;
  std::vector<std::string> outputs;           // file names inside dir
  std::map<std::string, std::string> results; // also written to the manifest
  std::string warning;
};

CommandResult cmd_renorm_table(const ExperimentConfig& cfg);
CommandResult cmd_simulate_hlsm(const ExperimentConfig& cfg);
CommandResult cmd_simulate_meanfield(const ExperimentConfig& cfg);
CommandResult cmd_convergence_rate(const ExperimentConfig& cfg);
CommandResult cmd_lln_decay(const ExperimentConfig& cfg);
CommandResult cmd_sample_gibbs(const ExperimentConfig& cfg);
CommandResult cmd_invariance(const ExperimentConfig& cfg);
CommandResult cmd_commutator(const ExperimentConfig& cfg);

/// Mean-field convergence of Gibbs dynamics. For one ensemble size and one
/// repetition: Φ_j starts from μ₁ ⊗ μ₀ on |n| <= M and follows the linear
/// stochastic flow; u_N = Φ + v with v(0) = 0 follows the truncated
/// renormalized dynamics (Wick constant α_M) driven by the same noise. The
/// truncated Gibbs measure is invariant for u_N and the flow is ergodic, so
/// after `burn_in` the pair (u_N, Φ) is a coupling of (approximately) Gibbs
/// data with its Gaussian limit. Returns max over t in [burn_in, burn_in + T]
/// of ‖(v_1, ∂_t v_1)(t)‖_{ℋ^s} = ‖(u_{N,1} - Φ_1, ∂_t u_{N,1} - ∂_t Φ_1)‖.
struct ConvergenceConfig {
  int n_grid = 32;
  double m = 1.0;
  double M = 8.0;
  std::vector<std::size_t> n_list;
  std::size_t reps = 10;
  double burn_in = 10.0;
  double T = 0.5;
  double dt = 0.01;
  double s = 0.9;
  std::uint64_t seed = 0;
};

double convergence_sample(const ConvergenceConfig& cfg, std::size_t n, std::uint64_t rep);
std::vector<LlnRow> convergence_table(const ConvergenceConfig& cfg);

GibbsSamplerConfig sampler_from(const ExperimentConfig& cfg);
LlnKind lln_kind_from(const std::string& name);

/// Shortest round-trip decimal form, so reruns produce identical bytes.
std::string format_double(double x);

}  // namespace sigwave
