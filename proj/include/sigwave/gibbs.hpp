#pragma once

// Frequency-truncated renormalized Gibbs measure ρ_N ⊗ μ₀^{⊗N} on |n| <= M.
//
// Positions are sampled by a preconditioned Crank–Nicolson Langevin chain
// (Metropolis-adjusted): on mode n, with k_n = m + |n|²,
//     û' = a û - c ĝ_n / k_n + b z_n / √k_n,
//     a = (2-h)/(2+h),  c = 2h/(2+h),  b = √(8h)/(2+h),
// where g = ∂V/∂u is the L² gradient of the Wick interaction and
// z_n ~ N(0, 1) complex. a² + b² = 1, so with V = 0 the proposal is exactly
// μ₁-reversible and every move is accepted.

#include <cstdint>
#include <string>
#include <vector>

#include "sigwave/grid.hpp"

namespace sigwave {

/// V(u) = (1/4N) ∫ [Σ_{k≠j} H_2(u_k)H_2(u_j) + Σ_j H_4(u_j)] dx with variance α, by grid quadrature.
double gibbs_potential(const std::vector<SpectralField>& u, double alpha);
double gibbs_potential(const ComponentEnsemble& u, double alpha);

/// -∂V/∂u_j = -(1/N)[(Σ_k u_k²) u_j - (N+2) α u_j].
std::vector<SpectralField> gibbs_drift(const std::vector<SpectralField>& u, double alpha);
std::vector<SpectralField> gibbs_drift(const ComponentEnsemble& u, double alpha);

/// ∫ :u²: dx = ‖u‖²_{L²} - α.
double wick_square_integral(const SpectralField& u, double alpha);

enum class SamplerMethod {
  pcnl,       // Metropolis-adjusted, exact for the truncated measure
  parabolic,  // unadjusted exponential-Euler step of the parabolic flow
};

struct GibbsSamplerConfig {
  int n_grid = 32;
  double m = 1.0;
  std::size_t N = 4;
  double M = 4.0;
  double h = 0.06;          // step size
  std::size_t chain = 3000; // total steps per chain, burn-in included
  std::size_t burnin = 1000;
  std::size_t thin = 1;
  double accept_lo = 0.3;
  double accept_hi = 0.8;
  bool interaction = true;
  SamplerMethod method = SamplerMethod::pcnl;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  GridSpec spec() const { return GridSpec::make(n_grid, m); }
  double alpha() const;
};

/// One Markov chain; all randomness keyed by (seed, chain_id, step).
class GibbsChain {
 public:
  GibbsChain(const GibbsSamplerConfig& cfg, std::uint64_t chain_id);
  /// Start from given positions (projected onto |n| <= M).
  GibbsChain(const GibbsSamplerConfig& cfg, std::uint64_t chain_id, std::vector<SpectralField> start);

  /// One proposal plus accept/reject. Returns true on acceptance.
  bool step();

  const std::vector<SpectralField>& positions() const { return u_; }
  double potential() const { return potential_; }
  std::size_t steps() const { return steps_; }
  std::size_t accepted() const { return accepted_; }

  /// log π(u) up to a constant: -V(u) - ½ Σ_n k_n |û_n|² over the full lattice.
  double log_target(const std::vector<SpectralField>& u) const;
  /// log q(to | from) up to a constant.
  double log_proposal(const std::vector<SpectralField>& from, const std::vector<SpectralField>& to) const;
  /// Proposal mean a û - c ĝ/k at `from`.
  std::vector<SpectralField> proposal_mean(const std::vector<SpectralField>& from) const;

  /// Standard complex normals on the active canonical modes for a given step and component.
  SpectralField proposal_noise(std::size_t step, std::size_t j) const;

 private:
  void refresh(const std::vector<SpectralField>& u, double& potential, std::vector<SpectralField>& grad) const;
  double quadratic(const std::vector<SpectralField>& u) const;
  std::vector<SpectralField> mean_with(const std::vector<SpectralField>& from,
                                       const std::vector<SpectralField>& grad) const;
  double log_q(const std::vector<SpectralField>& mean, const std::vector<SpectralField>& to) const;

  GibbsSamplerConfig cfg_;
  GridSpec spec_;
  std::uint64_t chain_id_;
  double alpha_;
  double a_, c_, b_;
  std::vector<std::size_t> active_;  // canonical modes |n| <= M off the Nyquist lines
  std::vector<double> stiffness_;    // k_n per index
  std::vector<SpectralField> u_;
  std::vector<SpectralField> grad_;  // ĝ (L² gradient of V)
  double potential_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t accepted_ = 0;
};

struct GibbsRun {
  std::vector<ComponentEnsemble> samples;  // positions from the chain, velocities from μ₀
  std::vector<double> trace;               // ∫ :u_1²: dx after burn-in, every step
  double acceptance = 0.0;                 // after burn-in
  double iat = 1.0;                        // integrated autocorrelation time of `trace`
  std::string warning;                     // non-empty when acceptance leaves the target band
};

GibbsRun sample_gibbs(const GibbsSamplerConfig& cfg, std::uint64_t chain_id = 0);

/// Velocities of one sample: i.i.d. truncated μ₀.
std::vector<SpectralField> sample_velocities(const GibbsSamplerConfig& cfg, std::uint64_t chain_id,
                                             std::uint64_t sample_index);

struct InvarianceConfig {
  GibbsSamplerConfig sampler;  // each sample is the end of an independent chain
  std::size_t samples = 500;
  double T = 1.0;
  double dt = 0.01;
};

struct ObservableReport {
  std::string name;
  double mean0 = 0.0, se0 = 0.0;
  double mean_t = 0.0, se_t = 0.0;
  double ks_statistic = 0.0;
  double ks_p = 1.0;
};

struct InvarianceReport {
  std::vector<ObservableReport> observables;  // ∫:u_1²:, ‖P_1 u_1‖², V(u)
  double acceptance = 0.0;                    // mean over chains
  std::vector<std::vector<double>> at_start;  // [observable][sample]
  std::vector<std::vector<double>> at_end;
};

/// Truncated renormalized dynamics with constant α_M started from Gibbs
/// samples; with interaction off the samples follow the linear flow.
InvarianceReport invariance_check(const InvarianceConfig& cfg);

/// Evolves one sample; returns the positions at time T.
std::vector<SpectralField> evolve_truncated(const GibbsSamplerConfig& cfg, const ComponentEnsemble& start, double T,
                                            double dt, std::uint64_t noise_seed);

struct ModeVarianceReport {
  double variance = 0.0;  // mean of |û_n|² over samples
  double se = 0.0;
  double gaussian = 0.0;  // 1/(m+|n|²) inside the truncation, 0 beyond
};

ModeVarianceReport gibbs_vs_gaussian_covariance(const std::vector<ComponentEnsemble>& samples, std::size_t j,
                                                const Mode& n, double M);

}  // namespace sigwave
