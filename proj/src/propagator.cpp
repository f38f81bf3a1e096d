#include "sigwave/propagator.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace sigwave {

ModeFrequency jbb(const Mode& n, double m) {
  const double omega_sq = m - 0.25 + n.norm_sq();
  return ModeFrequency{std::sqrt(Complex(omega_sq, 0.0)), omega_sq, n};
}

// Both functions switch to their Taylor series in x = ω²t² near the branch
// point so the three branches join smoothly.
double oscillation_cos(double omega_sq, double t) {
  const double x = omega_sq * t * t;
  if (std::abs(x) < 1e-3) {
    return 1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0 * (1.0 - x / 56.0)));
  }
  if (omega_sq > 0.0) return std::cos(t * std::sqrt(omega_sq));
  return std::cosh(t * std::sqrt(-omega_sq));
}

double oscillation_sinc(double omega_sq, double t) {
  const double x = omega_sq * t * t;
  if (std::abs(x) < 1e-3) {
    return t * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0 * (1.0 - x / 72.0))));
  }
  if (omega_sq > 0.0) {
    const double w = std::sqrt(omega_sq);
    return std::sin(t * w) / w;
  }
  const double k = std::sqrt(-omega_sq);
  return std::sinh(t * k) / k;
}

ModeKernel ModeKernel::make(Damping damping, double m, const Mode& n) {
  ModeKernel k;
  k.stiffness = m + n.norm_sq();
  k.gamma = damping == Damping::damped ? 0.5 : 0.0;
  k.omega_sq = k.stiffness - k.gamma * k.gamma;
  return k;
}

double ModeKernel::value(double t) const { return std::exp(-gamma * t) * oscillation_sinc(omega_sq, t); }

double ModeKernel::rate(double t) const {
  return std::exp(-gamma * t) * (oscillation_cos(omega_sq, t) - gamma * oscillation_sinc(omega_sq, t));
}

FlowMatrix flow_matrix(const ModeKernel& kernel, double t) {
  const double d = kernel.value(t);
  const double dd = kernel.rate(t);
  return FlowMatrix{dd + 2.0 * kernel.gamma * d, d, -kernel.stiffness * d, dd};
}

DuhamelWeights duhamel_weights(const ModeKernel& kernel, double h) {
  using Quad = boost::math::quadrature::gauss<double, 20>;
  const double scale = std::sqrt(std::abs(kernel.omega_sq)) + kernel.gamma + 1.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(h * scale / 2.0)));
  const double width = h / panels;
  double j0 = 0.0;
  double j1 = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = p * width;
    const double b = a + width;
    j0 += Quad::integrate([&](double r) { return kernel.value(r); }, a, b);
    j1 += Quad::integrate([&](double r) { return r * kernel.value(r); }, a, b);
  }
  const double dh = kernel.value(h);
  const double k1 = h * dh - j0;  // ∫_0^h r D'(r) dr
  DuhamelWeights w;
  w.frozen_pos = j0;
  w.frozen_vel = dh;
  w.pos0 = j1 / h;
  w.pos1 = j0 - j1 / h;
  w.vel0 = k1 / h;
  w.vel1 = dh - k1 / h;
  return w;
}

SpectralField apply_damped_propagator(const SpectralField& f, double t) {
  SpectralField out(f.spec());
  const double m = f.spec().mass;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = ModeKernel::make(Damping::damped, m, f.mode(i)).value(t) * f[i];
  }
  return out;
}

PairState apply_homogeneous_flow(const PairState& state, double t, Damping damping) {
  PairState out(state.spec());
  const double m = state.spec().mass;
  for (std::size_t i = 0; i < state.pos.size(); ++i) {
    const FlowMatrix a = flow_matrix(ModeKernel::make(damping, m, state.pos.mode(i)), t);
    out.pos[i] = a.pp * state.pos[i] + a.pv * state.vel[i];
    out.vel[i] = a.vp * state.pos[i] + a.vv * state.vel[i];
  }
  return out;
}

PairState duhamel_increment(const SpectralField& f_start, const SpectralField& f_end, double dt, Damping damping) {
  if (!(dt > 0.0)) throw std::invalid_argument("duhamel_increment: dt must be positive");
  f_start.require_same_grid(f_end);
  PairState out(f_start.spec());
  const double m = f_start.spec().mass;
  for (std::size_t i = 0; i < f_start.size(); ++i) {
    const DuhamelWeights w = duhamel_weights(ModeKernel::make(damping, m, f_start.mode(i)), dt);
    out.pos[i] = w.pos0 * f_start[i] + w.pos1 * f_end[i];
    out.vel[i] = w.vel0 * f_start[i] + w.vel1 * f_end[i];
  }
  return out;
}

LinearStepper::LinearStepper(const GridSpec& spec, double dt, Damping damping)
    : spec_(spec), dt_(dt), damping_(damping), flow_(spec.size()), weights_(spec.size()) {
  if (!(dt > 0.0)) throw std::invalid_argument("LinearStepper: dt must be positive");
  SpectralField probe(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const ModeKernel kernel = ModeKernel::make(damping, spec.mass, probe.mode(i));
    flow_[i] = flow_matrix(kernel, dt);
    weights_[i] = duhamel_weights(kernel, dt);
  }
}

PairState LinearStepper::flow(const PairState& state) const {
  PairState out(spec_);
  for (std::size_t i = 0; i < flow_.size(); ++i) {
    const FlowMatrix& a = flow_[i];
    out.pos[i] = a.pp * state.pos[i] + a.pv * state.vel[i];
    out.vel[i] = a.vp * state.pos[i] + a.vv * state.vel[i];
  }
  return out;
}

PairState LinearStepper::predict(const PairState& state, const SpectralField& f_start) const {
  PairState out = flow(state);
  for (std::size_t i = 0; i < flow_.size(); ++i) {
    out.pos[i] += weights_[i].frozen_pos * f_start[i];
    out.vel[i] += weights_[i].frozen_vel * f_start[i];
  }
  return out;
}

PairState LinearStepper::correct(const PairState& state, const SpectralField& f_start,
                                 const SpectralField& f_end) const {
  PairState out = flow(state);
  for (std::size_t i = 0; i < flow_.size(); ++i) {
    const DuhamelWeights& w = weights_[i];
    out.pos[i] += w.pos0 * f_start[i] + w.pos1 * f_end[i];
    out.vel[i] += w.vel0 * f_start[i] + w.vel1 * f_end[i];
  }
  return out;
}

}  // namespace sigwave
