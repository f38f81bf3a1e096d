#pragma once

// Sample statistics used by the Monte Carlo checks.

#include <span>

namespace sigwave {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sd / sqrt(n), unbiased sd
};

/// Requires at least two values.
MeanSe mean_se(std::span<const double> values);
double sample_variance(std::span<const double> values);

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;    // asymptotic Kolmogorov tail with the Stephens correction
};

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
/// Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2k²λ²), clamped to [0, 1].
double kolmogorov_tail(double lambda);

/// τ = 1 + 2 Σ_{t=1}^{W} ρ(t), W the first lag with W >= c τ(W) (Sokal's window, c = 5).
double integrated_autocorrelation_time(std::span<const double> series);

}  // namespace sigwave
