#include "sigwave/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "sigwave/dynamics.hpp"
#include "sigwave/noise.hpp"
#include "sigwave/parallel.hpp"
#include "sigwave/rng.hpp"
#include "sigwave/stats.hpp"
#include "sigwave/wick.hpp"

namespace sigwave {
namespace {

std::vector<SpectralField> positions_of(const ComponentEnsemble& u) {
  std::vector<SpectralField> out;
  out.reserve(u.size());
  for (const auto& p : u.components) out.push_back(p.pos);
  return out;
}

std::vector<RealGrid> physical(const std::vector<SpectralField>& u) {
  std::vector<RealGrid> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = to_physical(u[j]);
  return out;
}

// Weight of a canonical mode in full-lattice sums: n = 0 counts once, a ±n pair twice.
double lattice_weight(std::size_t idx) { return idx == 0 ? 1.0 : 2.0; }

}  // namespace

double gibbs_potential(const std::vector<SpectralField>& u, double alpha) {
  if (u.empty()) throw std::invalid_argument("gibbs_potential: empty ensemble");
  const std::vector<RealGrid> x = physical(u);
  const std::size_t points = x.front().size();
  RealGrid integrand(points);
  for (std::size_t i = 0; i < points; ++i) {
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (const auto& xj : x) {
      const double h2 = hermite(2, xj[i], alpha);
      s += h2;
      s2 += h2 * h2;
      s4 += hermite(4, xj[i], alpha);
    }
    integrand[i] = s * s - s2 + s4;
  }
  return pairwise_sum(integrand) / static_cast<double>(points) / (4.0 * static_cast<double>(u.size()));
}

double gibbs_potential(const ComponentEnsemble& u, double alpha) { return gibbs_potential(positions_of(u), alpha); }

std::vector<SpectralField> gibbs_drift(const std::vector<SpectralField>& u, double alpha) {
  if (u.empty()) throw std::invalid_argument("gibbs_drift: empty ensemble");
  const std::vector<RealGrid> x = physical(u);
  const std::size_t points = x.front().size();
  const double n = static_cast<double>(u.size());
  RealGrid weight(points, -(n + 2.0) * alpha);
  for (const auto& xj : x) {
    for (std::size_t i = 0; i < points; ++i) weight[i] += xj[i] * xj[i];
  }
  std::vector<SpectralField> out;
  out.reserve(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    RealGrid g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = -weight[i] * x[j][i] / n;
    out.push_back(from_physical(u[j].spec(), g));
  }
  return out;
}

std::vector<SpectralField> gibbs_drift(const ComponentEnsemble& u, double alpha) {
  return gibbs_drift(positions_of(u), alpha);
}

double wick_square_integral(const SpectralField& u, double alpha) {
  double acc = 0.0;
  for (const Complex& c : u.coeffs()) acc += std::norm(c);
  return acc - alpha;
}

void GibbsSamplerConfig::validate() const {
  GridSpec::make(n_grid, m);
  if (N == 0) throw std::invalid_argument("gibbs.N must be positive");
  if (!(M >= 0.0)) throw std::invalid_argument("truncation.M must be non-negative");
  if (!(h > 0.0)) throw std::invalid_argument("gibbs.h must be positive");
  if (burnin >= chain) throw std::invalid_argument("gibbs.burnin must be smaller than gibbs.chain");
  if (thin == 0) throw std::invalid_argument("gibbs.thin must be positive");
  if (!(accept_lo < accept_hi)) throw std::invalid_argument("gibbs acceptance band is empty");
}

double GibbsSamplerConfig::alpha() const { return alpha_m(m, M); }

GibbsChain::GibbsChain(const GibbsSamplerConfig& cfg, std::uint64_t chain_id)
    : GibbsChain(cfg, chain_id, [&] {
        cfg.validate();
        const GridSpec spec = cfg.spec();
        const double mass = cfg.m;
        std::vector<SpectralField> start;
        for (std::size_t j = 0; j < cfg.N; ++j) {
          const std::uint64_t key = hash_key({cfg.seed, chain_id, static_cast<std::uint64_t>(StreamKind::initial_position),
                                              static_cast<std::uint64_t>(j)});
          start.push_back(
              sample_gaussian_field(spec, cfg.M, [mass](const Mode& n) { return 1.0 / (mass + n.norm_sq()); }, key));
        }
        return start;
      }()) {}

GibbsChain::GibbsChain(const GibbsSamplerConfig& cfg, std::uint64_t chain_id, std::vector<SpectralField> start)
    : cfg_(cfg), spec_(cfg.spec()), chain_id_(chain_id), alpha_(cfg.alpha()) {
  cfg_.validate();
  if (start.size() != cfg.N) throw std::invalid_argument("gibbs chain: start has the wrong component count");
  a_ = (2.0 - cfg.h) / (2.0 + cfg.h);
  c_ = 2.0 * cfg.h / (2.0 + cfg.h);
  b_ = std::sqrt(8.0 * cfg.h) / (2.0 + cfg.h);
  SpectralField probe(spec_);
  stiffness_.resize(spec_.size());
  const int nyq = spec_.nyquist();
  for (std::size_t i = 0; i < spec_.size(); ++i) {
    const Mode n = probe.mode(i);
    stiffness_[i] = cfg.m + n.norm_sq();
    if (is_canonical(n) && n.k1 != nyq && n.k2 != nyq && within_radius(n, cfg.M)) active_.push_back(i);
  }
  for (auto& f : start) {
    if (!(f.spec() == spec_)) throw GridError("gibbs chain: start lives on another grid");
    SpectralField p(spec_);
    for (std::size_t i : active_) {
      p[i] = f[i];
      if (i != 0) p[p.conj_index(i)] = std::conj(f[i]);
    }
    if (!active_.empty() && active_.front() == 0) p[0] = Complex(f[0].real(), 0.0);
    u_.push_back(std::move(p));
  }
  refresh(u_, potential_, grad_);
}

void GibbsChain::refresh(const std::vector<SpectralField>& u, double& potential,
                         std::vector<SpectralField>& grad) const {
  if (!cfg_.interaction) {
    potential = 0.0;
    grad.assign(u.size(), SpectralField(spec_));
    return;
  }
  potential = gibbs_potential(u, alpha_);
  grad = gibbs_drift(u, alpha_);
  for (auto& g : grad) g *= -1.0;
}

double GibbsChain::quadratic(const std::vector<SpectralField>& u) const {
  double q = 0.0;
  for (const auto& f : u) {
    for (std::size_t i : active_) q += lattice_weight(i) * stiffness_[i] * std::norm(f[i]);
  }
  return q;
}

double GibbsChain::log_target(const std::vector<SpectralField>& u) const {
  double v = 0.0;
  std::vector<SpectralField> unused;
  refresh(u, v, unused);
  return -v - 0.5 * quadratic(u);
}

std::vector<SpectralField> GibbsChain::mean_with(const std::vector<SpectralField>& from,
                                                 const std::vector<SpectralField>& grad) const {
  std::vector<SpectralField> out(from.size(), SpectralField(spec_));
  const double h = cfg_.h;
  for (std::size_t j = 0; j < from.size(); ++j) {
    for (std::size_t i : active_) {
      const double k = stiffness_[i];
      Complex mean;
      if (cfg_.method == SamplerMethod::pcnl) {
        mean = a_ * from[j][i] - c_ * grad[j][i] / k;
      } else {
        const double decay = std::exp(-k * h);
        mean = decay * from[j][i] - (1.0 - decay) / k * grad[j][i];
      }
      if (i == 0) mean = Complex(mean.real(), 0.0);
      out[j][i] = mean;
      if (i != 0) out[j][out[j].conj_index(i)] = std::conj(mean);
    }
  }
  return out;
}

std::vector<SpectralField> GibbsChain::proposal_mean(const std::vector<SpectralField>& from) const {
  double v = 0.0;
  std::vector<SpectralField> grad;
  refresh(from, v, grad);
  return mean_with(from, grad);
}

double GibbsChain::log_q(const std::vector<SpectralField>& mean, const std::vector<SpectralField>& to) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < to.size(); ++j) {
    for (std::size_t i : active_) acc += lattice_weight(i) * stiffness_[i] * std::norm(to[j][i] - mean[j][i]);
  }
  return -acc / (2.0 * b_ * b_);
}

double GibbsChain::log_proposal(const std::vector<SpectralField>& from, const std::vector<SpectralField>& to) const {
  return log_q(proposal_mean(from), to);
}

SpectralField GibbsChain::proposal_noise(std::size_t step, std::size_t j) const {
  SpectralField z(spec_);
  const std::uint64_t key = hash_key({cfg_.seed, chain_id_, static_cast<std::uint64_t>(StreamKind::mala_proposal),
                                      static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(j)});
  const double r = std::sqrt(0.5);
  for (std::size_t i : active_) {
    KeyedRng rng(hash_key({key, static_cast<std::uint64_t>(i)}));
    if (i == 0) {
      z[0] = Complex(rng.normal(), 0.0);
    } else {
      const double re = rng.normal();
      const double im = rng.normal();
      z[i] = Complex(r * re, r * im);
      z[z.conj_index(i)] = std::conj(z[i]);
    }
  }
  return z;
}

bool GibbsChain::step() {
  const std::size_t s = steps_++;
  const std::vector<SpectralField> forward_mean = mean_with(u_, grad_);
  std::vector<SpectralField> proposal = forward_mean;
  for (std::size_t j = 0; j < proposal.size(); ++j) {
    const SpectralField z = proposal_noise(s, j);
    for (std::size_t i : active_) {
      const double k = stiffness_[i];
      const double sd = cfg_.method == SamplerMethod::pcnl ? b_ / std::sqrt(k)
                                                           : std::sqrt(-std::expm1(-2.0 * k * cfg_.h) / k);
      proposal[j][i] += sd * z[i];
      if (i != 0) proposal[j][proposal[j].conj_index(i)] = std::conj(proposal[j][i]);
    }
  }
  double v_new = 0.0;
  std::vector<SpectralField> g_new;
  refresh(proposal, v_new, g_new);
  bool accept = true;
  if (cfg_.method == SamplerMethod::pcnl) {
    const double log_ratio = (-v_new - 0.5 * quadratic(proposal)) - (-potential_ - 0.5 * quadratic(u_)) +
                             log_q(mean_with(proposal, g_new), u_) - log_q(forward_mean, proposal);
    KeyedRng rng({cfg_.seed, chain_id_, static_cast<std::uint64_t>(StreamKind::mala_accept),
                  static_cast<std::uint64_t>(s)});
    accept = std::log(rng.uniform()) < log_ratio;
  }
  if (accept) {
    u_ = std::move(proposal);
    potential_ = v_new;
    grad_ = std::move(g_new);
    ++accepted_;
  }
  return accept;
}

std::vector<SpectralField> sample_velocities(const GibbsSamplerConfig& cfg, std::uint64_t chain_id,
                                             std::uint64_t sample_index) {
  const GridSpec spec = cfg.spec();
  std::vector<SpectralField> out;
  for (std::size_t j = 0; j < cfg.N; ++j) {
    const std::uint64_t key = hash_key({cfg.seed, chain_id, static_cast<std::uint64_t>(StreamKind::initial_velocity),
                                        sample_index, static_cast<std::uint64_t>(j)});
    out.push_back(sample_gaussian_field(spec, cfg.M, [](const Mode&) { return 1.0; }, key));
  }
  return out;
}

namespace {

ComponentEnsemble assemble(const std::vector<SpectralField>& pos, const std::vector<SpectralField>& vel) {
  std::vector<PairState> comps;
  for (std::size_t j = 0; j < pos.size(); ++j) comps.emplace_back(pos[j], vel[j]);
  return ComponentEnsemble(std::move(comps));
}

std::string band_warning(const GibbsSamplerConfig& cfg, double acceptance) {
  if (cfg.method != SamplerMethod::pcnl) return {};
  if (acceptance >= cfg.accept_lo && acceptance <= cfg.accept_hi) return {};
  const double suggested = acceptance < cfg.accept_lo ? 0.5 * cfg.h : 2.0 * cfg.h;
  return "acceptance " + std::to_string(acceptance) + " outside [" + std::to_string(cfg.accept_lo) + ", " +
         std::to_string(cfg.accept_hi) + "]; try h = " + std::to_string(suggested);
}

}  // namespace

GibbsRun sample_gibbs(const GibbsSamplerConfig& cfg, std::uint64_t chain_id) {
  cfg.validate();
  GibbsChain chain(cfg, chain_id);
  const double alpha = cfg.alpha();
  GibbsRun run;
  std::size_t accepted_after = 0;
  for (std::size_t s = 0; s < cfg.chain; ++s) {
    const bool acc = chain.step();
    if (s < cfg.burnin) continue;
    accepted_after += acc ? 1 : 0;
    run.trace.push_back(wick_square_integral(chain.positions().front(), alpha));
    const std::size_t kept = s - cfg.burnin;
    if (kept % cfg.thin == 0) {
      const auto index = static_cast<std::uint64_t>(run.samples.size());
      run.samples.push_back(assemble(chain.positions(), sample_velocities(cfg, chain_id, index)));
    }
  }
  run.acceptance = static_cast<double>(accepted_after) / static_cast<double>(cfg.chain - cfg.burnin);
  run.iat = run.trace.size() >= 4 ? integrated_autocorrelation_time(run.trace) : 1.0;
  run.warning = band_warning(cfg, run.acceptance);
  return run;
}

std::vector<SpectralField> evolve_truncated(const GibbsSamplerConfig& cfg, const ComponentEnsemble& start, double T,
                                            double dt, std::uint64_t noise_seed) {
  const GridSpec spec = cfg.spec();
  if (start.size() != cfg.N) throw std::invalid_argument("evolve_truncated: wrong component count");
  const std::size_t steps = step_count(T, dt);
  std::vector<SpectralField> out;
  if (steps == 0) {
    for (const auto& p : start.components) out.push_back(p.pos);
    return out;
  }
  HlsmState state;
  state.v = ComponentEnsemble(spec, cfg.N);
  for (std::size_t j = 0; j < cfg.N; ++j) {
    ConvolutionState phi;
    phi.state = start[j];
    phi.stream = NoiseStream{noise_seed, j, StreamKind::space_time_noise};
    phi.cutoff = cfg.M;
    state.psi.push_back(std::move(phi));
  }
  state.renorm = RenormConstants::make(cfg.m, cfg.M, dt, 0);
  state.schedule = WickSchedule::alpha;
  state.settings = IntegratorSettings{dt, true, cfg.M};
  if (cfg.interaction) {
    const HlsmStepper stepper(spec, state.settings, cfg.M);
    for (std::size_t k = 0; k < steps; ++k) stepper.step(state);
  } else {
    const StochasticTransition tr(spec, dt, cfg.M);
    for (auto& p : state.psi) {
      for (std::size_t k = 0; k < steps; ++k) tr.advance(p);
    }
  }
  for (std::size_t j = 0; j < cfg.N; ++j) out.push_back(state.psi[j].state.pos + state.v[j].pos);
  return out;
}

InvarianceReport invariance_check(const InvarianceConfig& cfg) {
  cfg.sampler.validate();
  if (cfg.samples < 2) throw std::invalid_argument("invariance: need at least 2 samples");
  const std::size_t k = cfg.samples;
  const double alpha = cfg.sampler.alpha();
  InvarianceReport rep;
  rep.at_start.assign(3, std::vector<double>(k));
  rep.at_end.assign(3, std::vector<double>(k));
  std::vector<double> acceptance(k);
  auto observe = [&](const std::vector<SpectralField>& u, std::vector<std::vector<double>>& dst, std::size_t s) {
    dst[0][s] = wick_square_integral(u.front(), alpha);
    dst[1][s] = std::pow(sobolev_norm(project(u.front(), 1.0), 0.0), 2);
    dst[2][s] = gibbs_potential(u, alpha);
  };
  parallel_for(k, [&](std::size_t s) {
    const auto id = static_cast<std::uint64_t>(s);
    GibbsChain chain(cfg.sampler, id);
    for (std::size_t t = 0; t < cfg.sampler.chain; ++t) chain.step();
    acceptance[s] = static_cast<double>(chain.accepted()) / static_cast<double>(chain.steps());
    const ComponentEnsemble start = assemble(chain.positions(), sample_velocities(cfg.sampler, id, 0));
    observe(chain.positions(), rep.at_start, s);
    const std::uint64_t noise_seed =
        hash_key({cfg.sampler.seed, id, static_cast<std::uint64_t>(StreamKind::space_time_noise)});
    observe(evolve_truncated(cfg.sampler, start, cfg.T, cfg.dt, noise_seed), rep.at_end, s);
  });
  const char* names[] = {"wick_square_u1", "low_mode_mass_u1", "potential"};
  for (std::size_t o = 0; o < 3; ++o) {
    ObservableReport r;
    r.name = names[o];
    const MeanSe a = mean_se(rep.at_start[o]);
    const MeanSe b = mean_se(rep.at_end[o]);
    r.mean0 = a.mean;
    r.se0 = a.se;
    r.mean_t = b.mean;
    r.se_t = b.se;
    const KsResult ks = ks_two_sample(rep.at_start[o], rep.at_end[o]);
    r.ks_statistic = ks.statistic;
    r.ks_p = ks.p_value;
    rep.observables.push_back(r);
  }
  rep.acceptance = pairwise_sum(acceptance) / static_cast<double>(k);
  return rep;
}

ModeVarianceReport gibbs_vs_gaussian_covariance(const std::vector<ComponentEnsemble>& samples, std::size_t j,
                                                const Mode& n, double M) {
  if (samples.size() < 2) throw std::invalid_argument("mode variance: need at least 2 samples");
  std::vector<double> vals;
  vals.reserve(samples.size());
  for (const auto& s : samples) vals.push_back(std::norm(s[j].pos.at(n.k1, n.k2)));
  const MeanSe ms = mean_se(vals);
  const double m = samples.front().spec().mass;
  return ModeVarianceReport{ms.mean, ms.se, within_radius(n, M) ? 1.0 / (m + n.norm_sq()) : 0.0};
}

}  // namespace sigwave
