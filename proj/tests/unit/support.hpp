#pragma once

// Independent oracles shared by the unit tests: a classical RK4 integrator,
// adaptive Simpson quadrature, random smooth fields and field comparisons.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sigwave/grid.hpp"
#include "sigwave/noise.hpp"

namespace testing {

using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double, const State2&)>;

/// Classical fourth-order Runge–Kutta with `steps` uniform steps on [0, t].
inline State2 rk4(const Rhs2& f, State2 y, double t, int steps) {
  const double h = t / steps;
  double s = 0.0;
  auto axpy = [](const State2& a, double c, const State2& b) { return State2{a[0] + c * b[0], a[1] + c * b[1]}; };
  for (int i = 0; i < steps; ++i) {
    const State2 k1 = f(s, y);
    const State2 k2 = f(s + h / 2, axpy(y, h / 2, k1));
    const State2 k3 = f(s + h / 2, axpy(y, h / 2, k2));
    const State2 k4 = f(s + h, axpy(y, h, k3));
    for (int c = 0; c < 2; ++c) y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    s += h;
  }
  return y;
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
  const std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

/// Real random field with E|f̂(n)|² = ⟨n⟩^{-2p} on |n| <= cutoff.
inline sigwave::SpectralField random_field(const sigwave::GridSpec& spec, double cutoff, double p, std::uint64_t key) {
  return sigwave::sample_gaussian_field(
      spec, cutoff, [p](const sigwave::Mode& n) { return std::pow(1.0 + n.norm_sq(), -p); }, key);
}

inline sigwave::PairState random_pair(const sigwave::GridSpec& spec, double cutoff, std::uint64_t key) {
  return sigwave::PairState(random_field(spec, cutoff, 2.0, key), random_field(spec, cutoff, 1.0, key + 7919));
}

inline double max_diff(const sigwave::SpectralField& a, const sigwave::SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const sigwave::SpectralField& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Grid points x_i = 2π i / n along one axis.
inline double grid_coord(const sigwave::GridSpec& spec, int i) { return 2.0 * M_PI * i / spec.n_grid; }

/// Field sampled from a function of (x, y) on the grid.
inline sigwave::SpectralField from_function(const sigwave::GridSpec& spec, const std::function<double(double, double)>& f) {
  std::vector<double> v(spec.size());
  for (int a = 0; a < spec.n_grid; ++a) {
    for (int b = 0; b < spec.n_grid; ++b) v[a * spec.n_grid + b] = f(grid_coord(spec, a), grid_coord(spec, b));
  }
  return sigwave::from_physical(spec, v);
}

}  // namespace testing
