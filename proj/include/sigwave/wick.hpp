#pragma once

// Hermite polynomials with variance parameter and the Wick products built on them.

#include <span>

#include "sigwave/grid.hpp"
#include "sigwave/noise.hpp"

namespace sigwave {

/// H_k(x; c) for k = 0..4:
///   1, x, x² - c, x³ - 3cx, x⁴ - 6cx² + 3c².
double hermite(int k, double x, double c);

/// Variance parameter and truncation for a family of Wick products. Inputs are
/// P_M-projected before any pointwise product.
struct WickContext {
  double variance = 0.0;
  double M = kNoCutoff;

  static WickContext make(double variance, double M);
};

/// Pointwise H_k on grid values, in place.
void apply_hermite(std::span<double> values, int k, double c);

/// :ψ_k ψ_j: — H_2(ψ_j; c) when same_component, ψ_k ψ_j otherwise.
SpectralField wick_pair(const SpectralField& psi_k, const SpectralField& psi_j, const WickContext& ctx,
                        bool same_component);
/// :ψ_k² ψ_j: — H_3(ψ_j; c) when same_component, H_2(ψ_k; c) ψ_j otherwise.
SpectralField wick_triple(const SpectralField& psi_k, const SpectralField& psi_j, const WickContext& ctx,
                          bool same_component);

SpectralField wick_square(const SpectralField& u, const WickContext& ctx);
SpectralField wick_cube(const SpectralField& u, const WickContext& ctx);
SpectralField wick_quartic(const SpectralField& u, const WickContext& ctx);

}  // namespace sigwave
