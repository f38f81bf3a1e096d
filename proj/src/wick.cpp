#include "sigwave/wick.hpp"

#include <stdexcept>

namespace sigwave {

double hermite(int k, double x, double c) {
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return x;
    case 2:
      return x * x - c;
    case 3:
      return x * (x * x - 3.0 * c);
    case 4: {
      const double x2 = x * x;
      return x2 * x2 - 6.0 * c * x2 + 3.0 * c * c;
    }
    default:
      throw std::invalid_argument("hermite: degree must be in 0..4");
  }
}

WickContext WickContext::make(double variance, double M) {
  if (!(variance >= 0.0)) throw std::invalid_argument("Wick variance must be non-negative");
  return WickContext{variance, M};
}

void apply_hermite(std::span<double> values, int k, double c) {
  for (double& v : values) v = hermite(k, v, c);
}

namespace {

RealGrid projected_values(const SpectralField& f, double M) {
  return std::isinf(M) ? to_physical(f) : to_physical(project(f, M));
}

SpectralField power(const SpectralField& u, const WickContext& ctx, int k) {
  RealGrid v = projected_values(u, ctx.M);
  apply_hermite(v, k, ctx.variance);
  return from_physical(u.spec(), v);
}

}  // namespace

SpectralField wick_pair(const SpectralField& psi_k, const SpectralField& psi_j, const WickContext& ctx,
                        bool same_component) {
  psi_k.require_same_grid(psi_j);
  if (same_component) return power(psi_j, ctx, 2);
  RealGrid a = projected_values(psi_k, ctx.M);
  const RealGrid b = projected_values(psi_j, ctx.M);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return from_physical(psi_j.spec(), a);
}

SpectralField wick_triple(const SpectralField& psi_k, const SpectralField& psi_j, const WickContext& ctx,
                          bool same_component) {
  psi_k.require_same_grid(psi_j);
  if (same_component) return power(psi_j, ctx, 3);
  RealGrid a = projected_values(psi_k, ctx.M);
  const RealGrid b = projected_values(psi_j, ctx.M);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = hermite(2, a[i], ctx.variance) * b[i];
  return from_physical(psi_j.spec(), a);
}

SpectralField wick_square(const SpectralField& u, const WickContext& ctx) { return power(u, ctx, 2); }
SpectralField wick_cube(const SpectralField& u, const WickContext& ctx) { return power(u, ctx, 3); }
SpectralField wick_quartic(const SpectralField& u, const WickContext& ctx) { return power(u, ctx, 4); }

}  // namespace sigwave
