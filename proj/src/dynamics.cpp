#include "sigwave/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sigwave/diagnostics.hpp"
#include "sigwave/parallel.hpp"
#include "sigwave/wick.hpp"

namespace sigwave {
namespace {

RealGrid sum_range(const std::vector<RealGrid>& grids, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return grids[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  RealGrid a = sum_range(grids, lo, mid);
  const RealGrid b = sum_range(grids, mid, hi);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

std::vector<RealGrid> projected_physical(const std::vector<ConvolutionState>& psi, double M) {
  std::vector<RealGrid> out(psi.size());
  parallel_for(psi.size(), [&](std::size_t k) {
    out[k] = std::isinf(M) ? to_physical(psi[k].state.pos) : to_physical(project(psi[k].state.pos, M));
  });
  return out;
}

bool all_finite(const std::vector<PairState>& states) {
  for (const auto& s : states) {
    for (std::size_t i = 0; i < s.pos.size(); ++i) {
      if (!std::isfinite(s.pos[i].real()) || !std::isfinite(s.pos[i].imag()) || !std::isfinite(s.vel[i].real()) ||
          !std::isfinite(s.vel[i].imag())) {
        return false;
      }
    }
  }
  return true;
}

void require_finite(const std::vector<PairState>& states, double t) {
  if (!all_finite(states)) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t << " (candidate blow-up)";
    throw BlowupError(msg.str(), t);
  }
}

}  // namespace

RealGrid pointwise_mean(const std::vector<RealGrid>& grids) {
  if (grids.empty()) throw std::invalid_argument("pointwise_mean: no inputs");
  RealGrid s = sum_range(grids, 0, grids.size());
  const double inv = 1.0 / static_cast<double>(grids.size());
  for (double& v : s) v *= inv;
  return s;
}

SpectralMask::SpectralMask(const GridSpec& spec, const IntegratorSettings& settings) : keep_(spec.size(), 1) {
  SpectralField probe(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Mode n = probe.mode(i);
    bool keep = !settings.dealias || in_dealias_set(spec, n);
    if (!within_radius(n, settings.truncation)) keep = false;
    keep_[i] = keep ? 1 : 0;
  }
}

void SpectralMask::apply(SpectralField& f) const {
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (!keep_[i]) f[i] = Complex{};
  }
}

void exponential_step(const LinearStepper& linear, std::vector<PairState>& states, double t,
                      const ForcingFn& forcing) {
  const std::vector<SpectralField> f0 = forcing(t, states);
  std::vector<PairState> predicted(states.size());
  parallel_for(states.size(), [&](std::size_t j) { predicted[j] = linear.predict(states[j], f0[j]); });
  const std::vector<SpectralField> f1 = forcing(t + linear.dt(), predicted);
  parallel_for(states.size(), [&](std::size_t j) { states[j] = linear.correct(states[j], f0[j], f1[j]); });
}

// ---------------------------------------------------------------- HLSM_N

double HlsmState::wick_variance_at(std::size_t step) const {
  return schedule == WickSchedule::alpha ? renorm.alpha : renorm.sigma_at(step);
}

HlsmState make_hlsm_state(const GridSpec& spec, std::size_t n, double M, const IntegratorSettings& settings,
                          std::uint64_t seed, std::size_t steps_hint) {
  HlsmState s;
  s.v = ComponentEnsemble(spec, n);
  for (std::size_t j = 0; j < n; ++j) {
    s.psi.push_back(ConvolutionState::zero(spec, NoiseStream{seed, j, StreamKind::space_time_noise}));
  }
  s.renorm = RenormConstants::make(spec.mass, M, settings.dt, steps_hint);
  s.schedule = WickSchedule::sigma;
  s.settings = settings;
  return s;
}

HlsmStepper::HlsmStepper(const GridSpec& spec, const IntegratorSettings& settings, double noise_cutoff)
    : settings_(settings),
      linear_(spec, settings.dt, Damping::damped),
      noise_(spec, settings.dt, noise_cutoff),
      mask_(spec, settings) {}

std::vector<SpectralField> HlsmStepper::forcing(const std::vector<PairState>& v, const std::vector<RealGrid>& psi,
                                                double c) const {
  const std::size_t n = v.size();
  std::vector<RealGrid> u(n);
  parallel_for(n, [&](std::size_t k) {
    u[k] = to_physical(v[k].pos);
    for (std::size_t i = 0; i < u[k].size(); ++i) u[k][i] += psi[k][i];
  });
  // Σ_k H_2(u_k; c) - 2c, accumulated in component order.
  RealGrid weight(u.front().size(), -2.0 * c);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += u[k][i] * u[k][i] - c;
  }
  const double scale = -1.0 / static_cast<double>(n);
  std::vector<SpectralField> out(n);
  parallel_for(n, [&](std::size_t j) {
    RealGrid g(weight.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * weight[i] * u[j][i];
    out[j] = from_physical(v[j].pos.spec(), g);
    mask_.apply(out[j]);
  });
  return out;
}

std::vector<SpectralField> HlsmStepper::rhs(const HlsmState& state) const {
  if (state.psi.size() != state.v.size()) throw std::invalid_argument("hlsm: residual and noise counts differ");
  return forcing(state.v.components, projected_physical(state.psi, state.renorm.M), state.wick_variance());
}

void HlsmStepper::step(HlsmState& state) const {
  if (state.psi.size() != state.v.size()) throw std::invalid_argument("hlsm: residual and noise counts differ");
  if (std::abs(state.settings.dt - settings_.dt) > 1e-15) throw std::invalid_argument("hlsm: dt mismatch");
  const std::vector<RealGrid> psi_start = projected_physical(state.psi, state.renorm.M);
  parallel_for(state.psi.size(), [&](std::size_t j) { noise_.advance(state.psi[j]); });
  const std::vector<RealGrid> psi_end = projected_physical(state.psi, state.renorm.M);
  const double c_start = state.wick_variance_at(state.step_index);
  const double c_end = state.wick_variance_at(state.step_index + 1);
  const double t0 = state.time;
  exponential_step(linear_, state.v.components, t0, [&](double t, const std::vector<PairState>& v) {
    return t == t0 ? forcing(v, psi_start, c_start) : forcing(v, psi_end, c_end);
  });
  state.time += settings_.dt;
  state.step_index += 1;
  require_finite(state.v.components, state.time);
}

std::vector<SpectralField> hlsm_rhs(const std::vector<SpectralField>& v, const std::vector<SpectralField>& psi,
                                    double c, double M) {
  if (v.size() != psi.size() || v.empty()) throw std::invalid_argument("hlsm_rhs: mismatched N");
  const std::size_t n = v.size();
  std::vector<RealGrid> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    u[k] = to_physical(v[k]);
    const RealGrid p = std::isinf(M) ? to_physical(psi[k]) : to_physical(project(psi[k], M));
    for (std::size_t i = 0; i < u[k].size(); ++i) u[k][i] += p[i];
  }
  RealGrid weight(u.front().size(), -2.0 * c);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += hermite(2, u[k][i], c);
  }
  std::vector<SpectralField> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    RealGrid g(weight.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -weight[i] * u[j][i] / static_cast<double>(n);
    out.push_back(from_physical(v[j].spec(), g));
  }
  return out;
}

std::vector<SpectralField> hlsm_rhs(const HlsmState& state) {
  HlsmStepper stepper(state.v.spec(), state.settings, state.psi.front().cutoff);
  return stepper.rhs(state);
}

HlsmState step_hlsm(const HlsmState& state, double dt) {
  HlsmState next = state;
  next.settings.dt = dt;
  if (next.renorm.dt != dt) next.renorm = RenormConstants::make(next.renorm.m, next.renorm.M, dt, 0);
  HlsmStepper stepper(state.v.spec(), next.settings, state.psi.front().cutoff);
  stepper.step(next);
  return next;
}

// ---------------------------------------------------------- mean field

MeanFieldState make_meanfield_state(const GridSpec& spec, std::size_t replicas, double M,
                                    const IntegratorSettings& settings, std::uint64_t seed, bool stationary) {
  if (replicas == 0) throw std::invalid_argument("mean field: need at least one replica");
  MeanFieldState s;
  s.v.assign(replicas, PairState(spec));
  for (std::size_t r = 0; r < replicas; ++r) {
    const NoiseStream stream{seed, r, StreamKind::space_time_noise};
    s.psi.push_back(stationary ? ConvolutionState::stationary(spec, stream, M) : ConvolutionState::zero(spec, stream));
  }
  s.renorm = RenormConstants::make(spec.mass, M, settings.dt, 0);
  s.settings = settings;
  return s;
}

MeanFieldStepper::MeanFieldStepper(const GridSpec& spec, const IntegratorSettings& settings, double noise_cutoff)
    : settings_(settings),
      linear_(spec, settings.dt, Damping::damped),
      noise_(spec, settings.dt, noise_cutoff),
      mask_(spec, settings) {}

std::vector<SpectralField> MeanFieldStepper::forcing(const std::vector<PairState>& v,
                                                     const std::vector<RealGrid>& psi) const {
  const std::size_t r = v.size();
  std::vector<RealGrid> vv(r), v2(r), pv(r);
  parallel_for(r, [&](std::size_t k) {
    vv[k] = to_physical(v[k].pos);
    v2[k].resize(vv[k].size());
    pv[k].resize(vv[k].size());
    for (std::size_t i = 0; i < vv[k].size(); ++i) {
      v2[k][i] = vv[k][i] * vv[k][i];
      pv[k][i] = psi[k][i] * vv[k][i];
    }
  });
  const RealGrid ev2 = pointwise_mean(v2);
  const RealGrid epv = pointwise_mean(pv);
  std::vector<SpectralField> out(r);
  parallel_for(r, [&](std::size_t k) {
    RealGrid g(ev2.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -(ev2[i] + 2.0 * epv[i]) * (vv[k][i] + psi[k][i]);
    out[k] = from_physical(v[k].pos.spec(), g);
    mask_.apply(out[k]);
  });
  return out;
}

std::vector<SpectralField> MeanFieldStepper::rhs(const MeanFieldState& state) const {
  if (state.psi.size() != state.v.size()) throw std::invalid_argument("mean field: replica counts differ");
  return forcing(state.v, projected_physical(state.psi, state.renorm.M));
}

void MeanFieldStepper::step(MeanFieldState& state) const {
  if (state.psi.size() != state.v.size()) throw std::invalid_argument("mean field: replica counts differ");
  const std::vector<RealGrid> psi_start = projected_physical(state.psi, state.renorm.M);
  parallel_for(state.psi.size(), [&](std::size_t r) { noise_.advance(state.psi[r]); });
  const std::vector<RealGrid> psi_end = projected_physical(state.psi, state.renorm.M);
  const double t0 = state.time;
  exponential_step(linear_, state.v, t0, [&](double t, const std::vector<PairState>& v) {
    return t == t0 ? forcing(v, psi_start) : forcing(v, psi_end);
  });
  state.time += settings_.dt;
  state.step_index += 1;
  require_finite(state.v, state.time);
}

std::vector<SpectralField> meanfield_rhs(const std::vector<SpectralField>& v, const std::vector<SpectralField>& psi,
                                         double M) {
  if (v.size() != psi.size() || v.empty()) throw std::invalid_argument("meanfield_rhs: mismatched replica counts");
  const std::size_t r = v.size();
  std::vector<RealGrid> vv(r), pp(r), v2(r), pv(r);
  for (std::size_t k = 0; k < r; ++k) {
    vv[k] = to_physical(v[k]);
    pp[k] = std::isinf(M) ? to_physical(psi[k]) : to_physical(project(psi[k], M));
    v2[k].resize(vv[k].size());
    pv[k].resize(vv[k].size());
    for (std::size_t i = 0; i < vv[k].size(); ++i) {
      v2[k][i] = vv[k][i] * vv[k][i];
      pv[k][i] = pp[k][i] * vv[k][i];
    }
  }
  const RealGrid ev2 = pointwise_mean(v2);
  const RealGrid epv = pointwise_mean(pv);
  std::vector<SpectralField> out;
  for (std::size_t k = 0; k < r; ++k) {
    RealGrid g(ev2.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = -ev2[i] * vv[k][i] - 2.0 * epv[i] * vv[k][i] - ev2[i] * pp[k][i] - 2.0 * epv[i] * pp[k][i];
    }
    out.push_back(from_physical(v[k].spec(), g));
  }
  return out;
}

std::vector<SpectralField> meanfield_rhs(const MeanFieldState& state) {
  MeanFieldStepper stepper(state.v.front().spec(), state.settings, state.psi.front().cutoff);
  return stepper.rhs(state);
}

MeanFieldState step_meanfield(const MeanFieldState& state, double dt) {
  MeanFieldState next = state;
  next.settings.dt = dt;
  MeanFieldStepper stepper(state.v.front().spec(), next.settings, state.psi.front().cutoff);
  stepper.step(next);
  return next;
}

// ----------------------------------------------------- deterministic

DeterministicStepper::DeterministicStepper(const GridSpec& spec, const IntegratorSettings& settings,
                                           Coupling coupling)
    : settings_(settings), coupling_(coupling), linear_(spec, settings.dt, Damping::undamped), mask_(spec, settings) {}

std::vector<SpectralField> DeterministicStepper::rhs(const std::vector<PairState>& states) const {
  const std::size_t n = states.size();
  std::vector<RealGrid> u(n), u2(n);
  parallel_for(n, [&](std::size_t k) {
    u[k] = to_physical(states[k].pos);
    u2[k].resize(u[k].size());
    for (std::size_t i = 0; i < u[k].size(); ++i) u2[k][i] = u[k][i] * u[k][i];
  });
  RealGrid weight;
  if (coupling_ == Coupling::replica_expectation) {
    weight = pointwise_mean(u2);
  } else {
    weight.assign(u.front().size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += u2[k][i];
    }
    for (double& w : weight) w /= static_cast<double>(n);
  }
  std::vector<SpectralField> out(n);
  parallel_for(n, [&](std::size_t j) {
    RealGrid g(weight.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -weight[i] * u[j][i];
    out[j] = from_physical(states[j].pos.spec(), g);
    mask_.apply(out[j]);
  });
  return out;
}

void DeterministicStepper::step(ComponentEnsemble& ens, double t) const {
  exponential_step(linear_, ens.components, t,
                   [&](double, const std::vector<PairState>& states) { return rhs(states); });
  require_finite(ens.components, t + settings_.dt);
}

ComponentEnsemble step_deterministic_nlw(const ComponentEnsemble& ens, double dt, double m, bool dealias) {
  if (ens.spec().mass != m) throw GridError("step_deterministic_nlw: mass differs from the grid's");
  ComponentEnsemble out = ens;
  DeterministicStepper(ens.spec(), IntegratorSettings{dt, dealias, kNoCutoff},
                       DeterministicStepper::Coupling::component_average)
      .step(out);
  return out;
}

ComponentEnsemble step_deterministic_meanfield(const ComponentEnsemble& replicas, double dt, double m, bool dealias) {
  if (replicas.spec().mass != m) throw GridError("step_deterministic_meanfield: mass differs from the grid's");
  ComponentEnsemble out = replicas;
  DeterministicStepper(replicas.spec(), IntegratorSettings{dt, dealias, kNoCutoff},
                       DeterministicStepper::Coupling::replica_expectation)
      .step(out);
  return out;
}

// ----------------------------------------------------------- trajectories

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || T < 0.0) throw std::invalid_argument("step_count: need dt > 0 and T >= 0");
  return static_cast<std::size_t>(std::llround(T / dt));
}

void TrajectoryRecord::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
}

std::vector<double> TrajectoryRecord::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) {
      std::vector<double> out;
      for (const auto& row : rows) out.push_back(row[c]);
      return out;
    }
  }
  throw std::out_of_range("no column " + name);
}

namespace {

std::vector<double> component_norms(const std::vector<PairState>& states, double s) {
  std::vector<double> out(states.size());
  parallel_for(states.size(), [&](std::size_t j) { out[j] = pair_sobolev_norm(states[j], s); });
  return out;
}

std::vector<SpectralField> positions(const std::vector<PairState>& states) {
  std::vector<SpectralField> out;
  for (const auto& s : states) out.push_back(s.pos);
  return out;
}

}  // namespace

TrajectoryRecord run_trajectory(HlsmState& state, const TrajectoryConfig& cfg) {
  if (cfg.stride == 0) throw std::invalid_argument("run_trajectory: stride must be positive");
  const GridSpec spec = state.v.spec();
  const double m = spec.mass;
  const std::size_t steps = step_count(cfg.T, state.settings.dt);
  if (state.renorm.sigma.size() < steps + 1) {
    state.renorm = RenormConstants::make(m, state.renorm.M, state.settings.dt, state.step_index + steps);
  }
  HlsmStepper stepper(spec, state.settings, state.psi.front().cutoff);
  TrajectoryRecord rec;
  rec.columns = {"t", "wick_variance", "v1_hs", "v_an_hs", "v_an_hs_ct", "psi_an_weps", "energy_v", "modified_energy_v"};
  std::vector<double> running(state.size(), 0.0);
  auto record = [&] {
    const auto norms = component_norms(state.v.components, cfg.s);
    for (std::size_t j = 0; j < norms.size(); ++j) running[j] = std::max(running[j], norms[j]);
    std::vector<double> psi_norms(state.size());
    parallel_for(state.size(), [&](std::size_t j) {
      psi_norms[j] = sup_sobolev_norm(project(state.psi[j].state.pos, state.renorm.M), -cfg.eps);
    });
    rec.rows.push_back({state.time, state.wick_variance(), norms.front(), a_n_norm(norms), a_n_norm(running),
                        a_n_norm(psi_norms), energy_en(state.v, m), modified_energy(state.v, m, cfg.i_s, cfg.i_M)});
    if (cfg.keep_snapshots) rec.snapshots.push_back(positions(state.v.components));
  };
  record();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(state);
    if (k % cfg.stride == 0) record();
  }
  return rec;
}

TrajectoryRecord run_trajectory(MeanFieldState& state, const TrajectoryConfig& cfg) {
  if (cfg.stride == 0) throw std::invalid_argument("run_trajectory: stride must be positive");
  const GridSpec spec = state.v.front().spec();
  const std::size_t steps = step_count(cfg.T, state.settings.dt);
  MeanFieldStepper stepper(spec, state.settings, state.psi.front().cutoff);
  TrajectoryRecord rec;
  rec.columns = {"t", "v1_hs", "v_an_hs", "v_an_hs_ct", "energy_meanfield_v"};
  std::vector<double> running(state.size(), 0.0);
  auto record = [&] {
    const auto norms = component_norms(state.v, cfg.s);
    for (std::size_t j = 0; j < norms.size(); ++j) running[j] = std::max(running[j], norms[j]);
    rec.rows.push_back({state.time, norms.front(), a_n_norm(norms), a_n_norm(running),
                        energy_meanfield(ComponentEnsemble(state.v), spec.mass)});
    if (cfg.keep_snapshots) rec.snapshots.push_back(positions(state.v));
  };
  record();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(state);
    if (k % cfg.stride == 0) record();
  }
  return rec;
}

TrajectoryRecord run_trajectory(ComponentEnsemble& ens, const IntegratorSettings& settings,
                                DeterministicStepper::Coupling coupling, const TrajectoryConfig& cfg) {
  if (cfg.stride == 0) throw std::invalid_argument("run_trajectory: stride must be positive");
  const GridSpec spec = ens.spec();
  const std::size_t steps = step_count(cfg.T, settings.dt);
  DeterministicStepper stepper(spec, settings, coupling);
  const bool mean_field = coupling == DeterministicStepper::Coupling::replica_expectation;
  TrajectoryRecord rec;
  rec.columns = {"t", "energy", "u1_hs"};
  double t = 0.0;
  auto record = [&] {
    const double e = mean_field ? energy_meanfield(ens, spec.mass) : energy_en(ens, spec.mass);
    rec.rows.push_back({t, e, pair_sobolev_norm(ens[0], cfg.s)});
    if (cfg.keep_snapshots) rec.snapshots.push_back(positions(ens.components));
  };
  record();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(ens, t);
    t = static_cast<double>(k) * settings.dt;
    if (k % cfg.stride == 0) record();
  }
  return rec;
}

}  // namespace sigwave
