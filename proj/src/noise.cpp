#include "sigwave/noise.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace sigwave {

bool is_canonical(const Mode& n) { return n.k1 > 0 || (n.k1 == 0 && n.k2 >= 0); }

double alpha_m(double m, double M) {
  const int r = static_cast<int>(std::floor(M));
  double acc = 0.0;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      const int n2 = a * a + b * b;
      if (n2 <= M * M) acc += 1.0 / (m + n2);
    }
  }
  return acc;
}

namespace {

double damped_square_integral(const ModeKernel& kernel, double t) {
  using Quad = boost::math::quadrature::gauss<double, 20>;
  const double scale = std::sqrt(std::abs(kernel.omega_sq)) + 1.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(t * scale)));
  const double width = t / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    acc += Quad::integrate(
        [&](double s) {
          const double d = kernel.value(s);
          return d * d;
        },
        p * width, (p + 1) * width);
  }
  return acc;
}

}  // namespace

double sigma_mode(double t, double m, const Mode& n) {
  if (t < 0.0) throw std::invalid_argument("sigma: t must be non-negative");
  if (t == 0.0) return 0.0;
  const double w2 = m - 0.25 + n.norm_sq();
  if (std::abs(w2) < 1e-6) {
    // The closed form divides by ⟨⟨n⟩⟩²; integrate 2 D(s)² directly instead.
    return 2.0 * damped_square_integral(ModeKernel::make(Damping::damped, m, n), t);
  }
  const double decay = std::exp(-t);
  const double denom = 1.0 + 4.0 * w2;
  // sin(2tω)/ω, continued through sinh on the hyperbolic branch.
  const double sin_over_w = oscillation_sinc(w2, 2.0 * t);
  const double cos2 = oscillation_cos(w2, 2.0 * t);
  return (1.0 - decay) / w2 - decay * 2.0 * sin_over_w / denom - (1.0 - decay * cos2) / (w2 * denom);
}

double sigma_m(double t, double m, double M) {
  if (t < 0.0) throw std::invalid_argument("sigma_m: t must be non-negative");
  const int r = static_cast<int>(std::floor(M));
  double acc = 0.0;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      const Mode n{a, b};
      if (within_radius(n, M)) acc += sigma_mode(t, m, n);
    }
  }
  return acc;
}

RenormConstants RenormConstants::make(double m, double M, double dt, std::size_t steps) {
  RenormConstants rc;
  rc.m = m;
  rc.M = M;
  rc.dt = dt;
  rc.alpha = alpha_m(m, M);
  rc.sigma.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) rc.sigma.push_back(sigma_m(static_cast<double>(k) * dt, m, M));
  return rc;
}

double RenormConstants::sigma_at(std::size_t step) const {
  if (step < sigma.size()) return sigma[step];
  return sigma_m(static_cast<double>(step) * dt, m, M);
}

TransitionCovariance transition_covariance(const ModeKernel& kernel, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("transition_covariance: h must be positive");
  const double d = kernel.value(h);
  const double dd = kernel.rate(h);
  const double k = kernel.stiffness;
  TransitionCovariance q;
  // Q_xy = ∫ d/ds D² ds; Q_yy and Q_xx follow from d/ds(D'² + kD²) = -2D'²
  // and d/ds(D D') = D'² - D D' - k D².
  q.xy = d * d;
  q.yy = 1.0 - dd * dd - k * d * d;
  if (h < 1e-2) {
    q.xx = 2.0 * damped_square_integral(kernel, h);
  } else {
    q.xx = (q.yy - d * d - 2.0 * d * dd) / k;
  }
  return q;
}

SpectralField sample_gaussian_field(const GridSpec& spec, double cutoff,
                                    const std::function<double(const Mode&)>& variance, std::uint64_t key) {
  SpectralField f(spec);
  const int nyq = spec.nyquist();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode n = f.mode(i);
    if (!is_canonical(n) || n.k1 == nyq || n.k2 == nyq || !within_radius(n, cutoff)) continue;
    KeyedRng rng(hash_key({key, static_cast<std::uint64_t>(i)}));
    const double var = variance(n);
    if (n.k1 == 0 && n.k2 == 0) {
      f[i] = Complex(std::sqrt(var) * rng.normal(), 0.0);
    } else {
      const double sd = std::sqrt(0.5 * var);
      const double re = rng.normal();
      const double im = rng.normal();
      f[i] = Complex(sd * re, sd * im);
      f[f.conj_index(i)] = std::conj(f[i]);
    }
  }
  return f;
}

PairState sample_mu1_mu0_pair(const GridSpec& spec, double M, const NoiseStream& stream) {
  const double m = spec.mass;
  const std::uint64_t kp = hash_key({stream.root_seed, stream.component, static_cast<std::uint64_t>(stream.kind),
                                     static_cast<std::uint64_t>(StreamKind::initial_position)});
  const std::uint64_t kv = hash_key({stream.root_seed, stream.component, static_cast<std::uint64_t>(stream.kind),
                                     static_cast<std::uint64_t>(StreamKind::initial_velocity)});
  PairState p(sample_gaussian_field(spec, M, [m](const Mode& n) { return 1.0 / (m + n.norm_sq()); }, kp),
              sample_gaussian_field(spec, M, [](const Mode&) { return 1.0; }, kv));
  return p;
}

ConvolutionState ConvolutionState::zero(const GridSpec& spec, const NoiseStream& stream, double cutoff) {
  ConvolutionState s;
  s.state = PairState(spec);
  s.stream = stream;
  s.cutoff = cutoff;
  return s;
}

ConvolutionState ConvolutionState::stationary(const GridSpec& spec, const NoiseStream& stream, double cutoff) {
  ConvolutionState s;
  s.state = sample_mu1_mu0_pair(spec, cutoff, stream);
  s.stream = stream;
  s.cutoff = cutoff;
  return s;
}

StochasticTransition::StochasticTransition(const GridSpec& spec, double dt, double cutoff)
    : spec_(spec), dt_(dt), cutoff_(cutoff), flow_(spec.size()), cov_(spec.size()), chol_(spec.size()) {
  if (!(dt > 0.0)) throw std::invalid_argument("stochastic transition: dt must be positive");
  SpectralField probe(spec);
  const int nyq = spec.nyquist();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Mode n = probe.mode(i);
    const ModeKernel kernel = ModeKernel::make(Damping::damped, spec.mass, n);
    flow_[i] = flow_matrix(kernel, dt);
    cov_[i] = transition_covariance(kernel, dt);
    Factor& f = chol_[i];
    f.l11 = std::sqrt(std::max(cov_[i].xx, 0.0));
    f.l21 = f.l11 > 0.0 ? cov_[i].xy / f.l11 : 0.0;
    f.l22 = std::sqrt(std::max(cov_[i].yy - f.l21 * f.l21, 0.0));
    if (is_canonical(n) && n.k1 != nyq && n.k2 != nyq && within_radius(n, cutoff)) active_.push_back(i);
  }
}

void StochasticTransition::advance(ConvolutionState& s) const {
  if (!(s.state.spec() == spec_)) throw GridError("stochastic transition: grid mismatch");
  if (s.cutoff != cutoff_) throw std::invalid_argument("stochastic transition: cutoff mismatch");
  PairState& p = s.state;
  for (std::size_t i = 0; i < flow_.size(); ++i) {
    const FlowMatrix& a = flow_[i];
    const Complex x = p.pos[i];
    const Complex y = p.vel[i];
    p.pos[i] = a.pp * x + a.pv * y;
    p.vel[i] = a.vp * x + a.vv * y;
  }
  for (std::size_t i : active_) {
    const Factor& c = chol_[i];
    KeyedRng rng({s.stream.root_seed, s.stream.component, static_cast<std::uint64_t>(s.stream.kind), s.steps,
                  static_cast<std::uint64_t>(i)});
    Complex z1;
    Complex z2;
    if (i == 0) {
      z1 = rng.normal();
      z2 = rng.normal();
    } else {
      const double r = std::sqrt(0.5);
      const double a1 = rng.normal(), b1 = rng.normal(), a2 = rng.normal(), b2 = rng.normal();
      z1 = Complex(r * a1, r * b1);
      z2 = Complex(r * a2, r * b2);
    }
    p.pos[i] += c.l11 * z1;
    p.vel[i] += c.l21 * z1 + c.l22 * z2;
    if (i != 0) {
      const std::size_t j = p.pos.conj_index(i);
      p.pos[j] = std::conj(p.pos[i]);
      p.vel[j] = std::conj(p.vel[i]);
    }
  }
  s.time += dt_;
  s.steps += 1;
}

ConvolutionState step_stochastic_convolution(const ConvolutionState& state, double dt) {
  StochasticTransition tr(state.state.spec(), dt, state.cutoff);
  ConvolutionState out = state;
  tr.advance(out);
  return out;
}

ConvolutionState step_stationary_convolution(const ConvolutionState& state, double dt) {
  return step_stochastic_convolution(state, dt);
}

}  // namespace sigwave
