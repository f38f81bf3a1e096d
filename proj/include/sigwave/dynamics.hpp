#pragma once

// Time integration of the four evolution systems:
//   - the renormalized residual system of HLSM_N, u_{N,j} = Ψ_j + v_{N,j};
//   - the mean-field residual system, with expectations estimated by replica averages;
//   - the deterministic conservative O(N) system and its mean-field analogue.
//
// All steppers share one second-order exponential integrator: the linear part
// is the exact per-mode flow, the nonlinearity enters through the Duhamel
// integral with a frozen-forcing predictor and a trapezoidal corrector.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigwave/grid.hpp"
#include "sigwave/noise.hpp"
#include "sigwave/propagator.hpp"

namespace sigwave {

class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct IntegratorSettings {
  double dt = 1e-2;
  bool dealias = true;
  /// Galerkin truncation of the nonlinearity: keep |n| <= truncation.
  double truncation = kNoCutoff;
};

/// Which variance parameter the Wick products use.
enum class WickSchedule {
  sigma,  // σ_M(t): Ψ started from zero data
  alpha,  // α_M: Φ started from μ₁ ⊗ μ₀
};

/// Modes kept by the nonlinearity (two-thirds rule and/or Galerkin truncation).
class SpectralMask {
 public:
  SpectralMask(const GridSpec& spec, const IntegratorSettings& settings);
  void apply(SpectralField& f) const;
  bool keeps(std::size_t idx) const { return keep_[idx] != 0; }

 private:
  std::vector<unsigned char> keep_;
};

using ForcingFn = std::function<std::vector<SpectralField>(double t, const std::vector<PairState>& states)>;

/// One step of the exponential integrator on a list of states, all sharing
/// the linear flow of `linear`. The forcing is evaluated at t and t + dt.
void exponential_step(const LinearStepper& linear, std::vector<PairState>& states, double t, const ForcingFn& forcing);

// ---------------------------------------------------------------- HLSM_N

struct HlsmState {
  ComponentEnsemble v;                 // residuals v_{N,j}
  std::vector<ConvolutionState> psi;   // Ψ_j (or Φ_j)
  double time = 0.0;
  std::size_t step_index = 0;
  RenormConstants renorm;              // carries the analysis truncation M
  WickSchedule schedule = WickSchedule::sigma;
  IntegratorSettings settings;

  std::size_t size() const { return v.size(); }
  double wick_variance() const { return wick_variance_at(step_index); }
  double wick_variance_at(std::size_t step) const;
};

/// Zero residual, Ψ_j from zero data, σ_M(t) schedule.
HlsmState make_hlsm_state(const GridSpec& spec, std::size_t n, double M, const IntegratorSettings& settings,
                          std::uint64_t seed, std::size_t steps_hint = 0);

class HlsmStepper {
 public:
  HlsmStepper(const GridSpec& spec, const IntegratorSettings& settings, double noise_cutoff);

  void step(HlsmState& state) const;
  /// -(1/N) Σ_k :u_k² u_j: for the current state, masked.
  std::vector<SpectralField> rhs(const HlsmState& state) const;

  const LinearStepper& linear() const { return linear_; }

 private:
  std::vector<SpectralField> forcing(const std::vector<PairState>& v, const std::vector<RealGrid>& psi,
                                     double c) const;

  IntegratorSettings settings_;
  LinearStepper linear_;
  StochasticTransition noise_;
  SpectralMask mask_;
};

/// Factored assembly of -(1/N) Σ_k :u_k² u_j: on the grid, where
/// :u_k² u_j: is the six-term expansion in (v, ψ) with variance c:
///   -(1/N) (Σ_k H_2(ψ_k + v_k; c) - 2c) (ψ_j + v_j).
std::vector<SpectralField> hlsm_rhs(const std::vector<SpectralField>& v, const std::vector<SpectralField>& psi,
                                    double c, double M);
std::vector<SpectralField> hlsm_rhs(const HlsmState& state);
HlsmState step_hlsm(const HlsmState& state, double dt);

// ---------------------------------------------------------- mean field

struct MeanFieldState {
  std::vector<PairState> v;            // one residual per replica
  std::vector<ConvolutionState> psi;   // independent Ψ_r (or Φ_r)
  double time = 0.0;
  std::size_t step_index = 0;
  RenormConstants renorm;
  IntegratorSettings settings;

  std::size_t size() const { return v.size(); }
};

MeanFieldState make_meanfield_state(const GridSpec& spec, std::size_t replicas, double M,
                                    const IntegratorSettings& settings, std::uint64_t seed, bool stationary);

class MeanFieldStepper {
 public:
  MeanFieldStepper(const GridSpec& spec, const IntegratorSettings& settings, double noise_cutoff);

  void step(MeanFieldState& state) const;
  std::vector<SpectralField> rhs(const MeanFieldState& state) const;

 private:
  std::vector<SpectralField> forcing(const std::vector<PairState>& v, const std::vector<RealGrid>& psi) const;

  IntegratorSettings settings_;
  LinearStepper linear_;
  StochasticTransition noise_;
  SpectralMask mask_;
};

/// -(Ê[v²] + 2Ê[Ψv]) (v_r + Ψ_r), Ê the replica average.
std::vector<SpectralField> meanfield_rhs(const std::vector<SpectralField>& v, const std::vector<SpectralField>& psi,
                                         double M);
std::vector<SpectralField> meanfield_rhs(const MeanFieldState& state);
MeanFieldState step_meanfield(const MeanFieldState& state, double dt);

// ----------------------------------------------------- deterministic

class DeterministicStepper {
 public:
  enum class Coupling { component_average, replica_expectation };

  DeterministicStepper(const GridSpec& spec, const IntegratorSettings& settings, Coupling coupling);

  void step(ComponentEnsemble& ens, double t = 0.0) const;
  std::vector<SpectralField> rhs(const std::vector<PairState>& states) const;

 private:
  IntegratorSettings settings_;
  Coupling coupling_;
  LinearStepper linear_;
  SpectralMask mask_;
};

/// (∂_t² + m - Δ) u_j = -(1/N) Σ_k u_k² u_j, one step.
ComponentEnsemble step_deterministic_nlw(const ComponentEnsemble& ens, double dt, double m, bool dealias = true);
/// (∂_t² + m - Δ) u = -Ê[u²] u over replicas, one step.
ComponentEnsemble step_deterministic_meanfield(const ComponentEnsemble& replicas, double dt, double m,
                                               bool dealias = true);

// ----------------------------------------------------------- trajectories

struct TrajectoryConfig {
  double T = 1.0;
  std::size_t stride = 1;      // record every `stride` steps
  double s = 0.9;              // regularity of the recorded ℋ^s norms
  double eps = 0.1;            // W^{-eps,∞} proxies for stochastic objects
  double i_s = 0.9;            // I-operator parameters for the modified energy
  double i_M = 8.0;
  bool keep_snapshots = false;
};

struct TrajectoryRecord {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Saved node states (component positions), only when keep_snapshots.
  std::vector<std::vector<SpectralField>> snapshots;

  void write_csv(const std::string& path) const;
  std::vector<double> column(const std::string& name) const;
};

std::size_t step_count(double T, double dt);

TrajectoryRecord run_trajectory(HlsmState& state, const TrajectoryConfig& cfg);
TrajectoryRecord run_trajectory(MeanFieldState& state, const TrajectoryConfig& cfg);
TrajectoryRecord run_trajectory(ComponentEnsemble& ens, const IntegratorSettings& settings,
                                DeterministicStepper::Coupling coupling, const TrajectoryConfig& cfg);

/// Elementwise mean over equally sized grids, summed pairwise.
RealGrid pointwise_mean(const std::vector<RealGrid>& grids);

}  // namespace sigwave
