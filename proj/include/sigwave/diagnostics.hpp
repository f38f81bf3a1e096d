#pragma once

// Measured quantities: energies, modified energies, enhanced-data norms,
// law-of-large-numbers estimators, commutator defects, difference norms and
// power-law rate fits.

#include <cstdint>
#include <span>
#include <vector>

#include "sigwave/grid.hpp"
#include "sigwave/noise.hpp"

namespace sigwave {

/// E_N = ½∫(‖∇u‖²_{𝒜_N} + m‖u‖²_{𝒜_N} + ‖∂_t u‖²_{𝒜_N}) dx + ¼∫‖u‖⁴_{𝒜_N} dx.
double energy_en(const ComponentEnsemble& ens, double m);
/// 𝓔 = ½Ê∫(|∇u|² + m u² + (∂_t u)²) dx + ¼∫(Ê[u²])² dx over replicas.
double energy_meanfield(const ComponentEnsemble& replicas, double m);
/// E_N(Iv, ∂_t Iv).
double modified_energy(const ComponentEnsemble& ens, double m, double s, double M);

/// Ψ_j (or Φ_j) at saved time nodes plus the Wick variance at each node.
struct EnhancedData {
  std::vector<std::vector<SpectralField>> psi;  // [node][j]
  std::vector<double> variance;                 // per node
  double M = kNoCutoff;
};

struct ZnNorm {
  double first = 0.0;        // ‖Ψ_j‖_{𝒜_N C_T W^{-ε,∞}}
  double second_diag = 0.0;  // ‖:Ψ_k²:‖_{𝒜_N C_T W^{-ε,∞}}
  double second = 0.0;       // ‖:Ψ_kΨ_j:‖_{𝒜_N^{(2)} C_T W^{-ε,∞}}
  double third = 0.0;        // ‖:Ψ_k²Ψ_j:‖_{𝒜_N^{(2)} C_T W^{-ε,∞}}

  double total() const { return first + second_diag + second + third; }
};

ZnNorm zn_norm(const EnhancedData& data, double eps);

enum class LlnKind {
  wick_square_avg,     // (1/N) Σ_k :Ψ_k²:
  wick_triple_avg,     // (1/N) Σ_k :Ψ_k² Ψ_1:
  wick_triple_avg_an,  // 𝒜_{N,j} of (1/N) Σ_k :Ψ_k² Ψ_j:
};

struct LlnConfig {
  GridSpec spec;
  double M = 8.0;
  double T = 1.0;
  double dt = 0.05;
  std::size_t reps = 20;
  double eps = 0.1;
  std::uint64_t seed = 0;
};

struct LlnRow {
  std::size_t N = 0;
  double mean_norm = 0.0;
  double se = 0.0;
};

/// Mean over `reps` of the L²_T W^{-eps,∞} proxy norm of the averaged Wick power.
std::vector<LlnRow> lln_estimator(LlnKind kind, const std::vector<std::size_t>& n_list, const LlnConfig& cfg);
/// One realization of the norm for a given ensemble size.
double lln_sample(LlnKind kind, std::size_t n, const LlnConfig& cfg, std::uint64_t rep);

struct CommutatorConfig {
  int n_grid = 512;      // product grid, must hold 3 × band without aliasing
  int band = 64;         // trial fields live on |k1|, |k2| <= band
  std::uint64_t seed = 0;
};

struct CommutatorRow {
  double M = 0.0;
  double defect_max = 0.0;
};

/// ‖I(f²g) - (If)² Ig‖_{L²}, products evaluated on f's grid.
double commutator_value(const SpectralField& f, const SpectralField& g, double s, double M);
/// Trial field with coefficient decay ⟨n⟩^{-2}, scaled to ‖If‖_{H¹} = 1.
SpectralField commutator_trial_field(const CommutatorConfig& cfg, double s, double M, std::uint64_t key);
std::vector<CommutatorRow> commutator_defect(double s, const std::vector<double>& m_list, std::size_t trials,
                                             const CommutatorConfig& cfg);

struct DifferenceNorms {
  double c_t_norm = 0.0;  // max over nodes of ‖(u_j - w_j, ∂_t u_j - ∂_t w_j)‖_{ℋ^s}
  double an_norm = 0.0;   // 𝒜_N over components of the same C_T norm
};

DifferenceNorms difference_norms(const std::vector<ComponentEnsemble>& traj, const std::vector<ComponentEnsemble>& limit,
                                 double s, std::size_t j);

struct RateFit {
  std::vector<double> x;  // log N
  std::vector<double> y;  // log error
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Least squares of log(err) on log(N). Throws std::invalid_argument with fewer than 3 points.
RateFit fit_rate(std::span<const double> n, std::span<const double> err);

}  // namespace sigwave
