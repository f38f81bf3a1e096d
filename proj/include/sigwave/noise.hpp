#pragma once

// Space-time white noise, the stochastic convolutions Ψ (zero data) and Φ
// (Gaussian stationary data), and the renormalization constants σ_M(t), α_M.
//
// On mode n the convolution solves x'' + x' + (m + |n|²) x = √2 dB_n/dt with
// E|B_n(t)|² = t. Over a step h the pair (x, x') moves by the exact flow plus
// a complex Gaussian with covariance
//     Q_n(h) = 2 ∫_0^h (D(s), D'(s))ᵀ (D(s), D'(s)) ds,
// so sampled paths carry no time-discretization bias.

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sigwave/grid.hpp"
#include "sigwave/propagator.hpp"
#include "sigwave/rng.hpp"

namespace sigwave {

inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

/// α_M = Σ_{|n| <= M} 1 / (m + |n|²).
double alpha_m(double m, double M);
/// E|Ψ̂_n(t)|² on one mode, from the closed form in ⟨⟨n⟩⟩.
double sigma_mode(double t, double m, const Mode& n);
/// σ_M(t) = E[Ψ_M(t, x)²]. Throws std::invalid_argument for t < 0.
double sigma_m(double t, double m, double M);

struct RenormConstants {
  double m = 1.0;
  double M = 0.0;
  double dt = 0.0;
  std::vector<double> sigma;  // σ_M(k dt), k = 0..steps
  double alpha = 0.0;

  static RenormConstants make(double m, double M, double dt, std::size_t steps);
  double sigma_at(std::size_t step) const;
};

/// Covariance of the one-step Gaussian increment of (x̂_n, ∂_t x̂_n).
struct TransitionCovariance {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

TransitionCovariance transition_covariance(const ModeKernel& kernel, double h);

struct NoiseStream {
  std::uint64_t root_seed = 0;
  std::uint64_t component = 0;
  StreamKind kind = StreamKind::space_time_noise;
};

/// Mean-zero Gaussian field with E|f̂(n)|² = variance(n) for |n| <= cutoff,
/// Hermitian-symmetric, Nyquist row/column zero. The draw is a pure function
/// of `key` and the mode.
SpectralField sample_gaussian_field(const GridSpec& spec, double cutoff,
                                    const std::function<double(const Mode&)>& variance, std::uint64_t key);

/// (φ⁽⁰⁾, φ⁽¹⁾) with laws μ₁, μ₀ restricted to |n| <= M.
PairState sample_mu1_mu0_pair(const GridSpec& spec, double M, const NoiseStream& stream);

struct ConvolutionState {
  PairState state;
  double time = 0.0;
  std::uint64_t steps = 0;
  NoiseStream stream;
  double cutoff = kNoCutoff;  // noise acts on |n| <= cutoff only

  /// Ψ: zero data at t = 0.
  static ConvolutionState zero(const GridSpec& spec, const NoiseStream& stream, double cutoff = kNoCutoff);
  /// Φ: data drawn from μ₁ ⊗ μ₀ on |n| <= cutoff.
  static ConvolutionState stationary(const GridSpec& spec, const NoiseStream& stream, double cutoff);
};

/// Precomputed exact transition for one (grid, dt, cutoff).
class StochasticTransition {
 public:
  StochasticTransition(const GridSpec& spec, double dt, double cutoff = kNoCutoff);

  double dt() const { return dt_; }
  double cutoff() const { return cutoff_; }
  const GridSpec& spec() const { return spec_; }
  const TransitionCovariance& covariance_at(std::size_t idx) const { return cov_[idx]; }

  void advance(ConvolutionState& s) const;

 private:
  struct Factor {
    double l11 = 0.0, l21 = 0.0, l22 = 0.0;
  };
  GridSpec spec_;
  double dt_;
  double cutoff_;
  std::vector<FlowMatrix> flow_;
  std::vector<TransitionCovariance> cov_;
  std::vector<Factor> chol_;
  std::vector<std::size_t> active_;  // canonical half-lattice indices inside the cutoff
};

/// One exact step of length dt.
ConvolutionState step_stochastic_convolution(const ConvolutionState& state, double dt);
/// Same transition, for a state started from stationary data.
ConvolutionState step_stationary_convolution(const ConvolutionState& state, double dt);

/// True for the canonical representative of {n, -n}: n = 0, k1 > 0, or k1 = 0 and k2 > 0.
bool is_canonical(const Mode& n);

}  // namespace sigwave
