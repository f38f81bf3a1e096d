#pragma once

// Exact per-mode linear flow of ∂_t² + 2γ∂_t + (m + |n|²).
//
// The damped wave operator ∂_t² + ∂_t + m - Δ is the case γ = 1/2; its
// fundamental solution on mode n is
//     D(t) = e^{-t/2} sin(t ω_n) / ω_n,     ω_n² = m - 1/4 + |n|²,
// continued through sinh(tκ)/κ when ω_n² < 0 and t when ω_n² = 0.
// The undamped case γ = 0 (ω_n² = m + |n|²) drives the conservative systems.

#include <vector>

#include "sigwave/grid.hpp"

namespace sigwave {

struct ModeFrequency {
  Complex omega;    // principal square root of omega_sq
  double omega_sq;  // m - 1/4 + |n|²
  Mode mode;

  /// True on the sinh / linear branch (only n = 0 with m <= 1/4).
  bool hyperbolic() const { return omega_sq <= 0.0; }
};

/// ⟨⟨n⟩⟩_m = sqrt(m - 1/4 + |n|²).
ModeFrequency jbb(const Mode& n, double m);

/// cos(tω) as an entire function of ω² (cosh on the negative branch).
double oscillation_cos(double omega_sq, double t);
/// sin(tω)/ω as an entire function of ω² (sinh(tκ)/κ, or t at ω = 0).
double oscillation_sinc(double omega_sq, double t);

enum class Damping { damped, undamped };

/// Scalar kernel of x'' + 2γ x' + k x = 0 with x(0) = 0, x'(0) = 1.
struct ModeKernel {
  double gamma = 0.5;     // half the damping rate
  double omega_sq = 0.0;  // k - γ²
  double stiffness = 0.0; // k = m + |n|²

  static ModeKernel make(Damping damping, double m, const Mode& n);

  double value(double t) const;  // D(t)
  double rate(double t) const;   // D'(t)
};

/// Per-mode matrix exponential of [[0, 1], [-k, -2γ]].
struct FlowMatrix {
  double pp = 1.0, pv = 0.0, vp = 0.0, vv = 1.0;
};

FlowMatrix flow_matrix(const ModeKernel& kernel, double t);

/// Duhamel weights for one step of length h on one mode. With F linear in
/// time between F0 (step start) and F1 (step end),
///   ∫_0^h e^{A(h-s)} (0, F(s)) ds = (pos0 F0 + pos1 F1, vel0 F0 + vel1 F1),
/// and with F frozen at F0 the increment is (frozen_pos F0, frozen_vel F0).
struct DuhamelWeights {
  double frozen_pos = 0.0, frozen_vel = 0.0;
  double pos0 = 0.0, pos1 = 0.0, vel0 = 0.0, vel1 = 0.0;
};

DuhamelWeights duhamel_weights(const ModeKernel& kernel, double h);

/// 𝒟(t) applied mode-wise.
SpectralField apply_damped_propagator(const SpectralField& f, double t);
/// (S(t)(f, g), ∂_t S(t)(f, g)).
PairState apply_homogeneous_flow(const PairState& state, double t, Damping damping = Damping::damped);
/// Second-order approximation of (ℐ(F)(dt), ∂_t ℐ(F)(dt)) from the forcing at
/// the two ends of the step. Throws std::invalid_argument when dt <= 0.
PairState duhamel_increment(const SpectralField& f_start, const SpectralField& f_end, double dt,
                            Damping damping = Damping::damped);

/// Cached per-mode flow matrices and Duhamel weights for one (grid, dt, damping).
class LinearStepper {
 public:
  LinearStepper(const GridSpec& spec, double dt, Damping damping);

  const GridSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  Damping damping() const { return damping_; }

  /// Homogeneous flow over one step.
  PairState flow(const PairState& state) const;
  /// flow(state) plus the Duhamel term with forcing frozen at f_start.
  PairState predict(const PairState& state, const SpectralField& f_start) const;
  /// flow(state) plus the trapezoidal-in-time Duhamel term.
  PairState correct(const PairState& state, const SpectralField& f_start, const SpectralField& f_end) const;

  const FlowMatrix& flow_matrix_at(std::size_t idx) const { return flow_[idx]; }
  const DuhamelWeights& weights_at(std::size_t idx) const { return weights_[idx]; }

 private:
  GridSpec spec_;
  double dt_;
  Damping damping_;
  std::vector<FlowMatrix> flow_;
  std::vector<DuhamelWeights> weights_;
};

}  // namespace sigwave
