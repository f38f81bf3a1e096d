#include "sigwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sigwave/dynamics.hpp"
#include "sigwave/parallel.hpp"
#include "sigwave/rng.hpp"
#include "sigwave/wick.hpp"

namespace sigwave {
namespace {

// Σ_n (m + |n|²)|û|² + |v̂|² for one component.
double quadratic_part(const PairState& p, double m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.pos.size(); ++i) {
    const Mode n = p.pos.mode(i);
    acc += (m + n.norm_sq()) * std::norm(p.pos[i]) + std::norm(p.vel[i]);
  }
  return acc;
}

double grid_mean(const RealGrid& g) {
  return pairwise_sum(g) / static_cast<double>(g.size());
}

double energy_with(const ComponentEnsemble& ens, double m, bool tree_average) {
  if (ens.size() == 0) throw std::invalid_argument("energy: empty ensemble");
  const std::size_t n = ens.size();
  std::vector<double> quad(n);
  std::vector<RealGrid> sq(n);
  parallel_for(n, [&](std::size_t j) {
    quad[j] = quadratic_part(ens[j], m);
    sq[j] = to_physical(ens[j].pos);
    for (double& x : sq[j]) x *= x;
  });
  RealGrid avg;
  if (tree_average) {
    avg = pointwise_mean(sq);
  } else {
    avg.assign(sq.front().size(), 0.0);
    for (const auto& g : sq) {
      for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += g[i];
    }
    for (double& x : avg) x /= static_cast<double>(n);
  }
  for (double& x : avg) x *= x;
  return 0.5 * pairwise_sum(quad) / static_cast<double>(n) + 0.25 * grid_mean(avg);
}

double lln_norm_of_nodes(const std::vector<double>& sq_norms, double dt) {
  // Trapezoid rule for ∫_0^T ‖X(t)‖² dt.
  if (sq_norms.size() < 2) return 0.0;
  double acc = 0.5 * (sq_norms.front() + sq_norms.back());
  for (std::size_t k = 1; k + 1 < sq_norms.size(); ++k) acc += sq_norms[k];
  return std::sqrt(acc * dt);
}

}  // namespace

double energy_en(const ComponentEnsemble& ens, double m) { return energy_with(ens, m, false); }

double energy_meanfield(const ComponentEnsemble& replicas, double m) { return energy_with(replicas, m, true); }

double modified_energy(const ComponentEnsemble& ens, double m, double s, double M) {
  ComponentEnsemble smoothed = ens;
  for (auto& p : smoothed.components) {
    p.pos = apply_i_operator(p.pos, s, M);
    p.vel = apply_i_operator(p.vel, s, M);
  }
  return energy_en(smoothed, m);
}

ZnNorm zn_norm(const EnhancedData& data, double eps) {
  ZnNorm z;
  if (data.psi.empty()) return z;
  const std::size_t n = data.psi.front().size();
  if (data.variance.size() != data.psi.size()) throw std::invalid_argument("zn_norm: one variance per node required");
  std::vector<double> first(n, 0.0), diag(n, 0.0), pair(n * n, 0.0), triple(n * n, 0.0);
  for (std::size_t t = 0; t < data.psi.size(); ++t) {
    const auto& psi = data.psi[t];
    if (psi.size() != n) throw std::invalid_argument("zn_norm: component count changes between nodes");
    const WickContext ctx = WickContext::make(data.variance[t], data.M);
    parallel_for(n, [&](std::size_t j) {
      const SpectralField pj = std::isinf(data.M) ? psi[j] : project(psi[j], data.M);
      first[j] = std::max(first[j], sup_sobolev_norm(pj, -eps));
      diag[j] = std::max(diag[j], sup_sobolev_norm(wick_square(psi[j], ctx), -eps));
      for (std::size_t k = 0; k < n; ++k) {
        const bool same = k == j;
        double& p = pair[k * n + j];
        double& q = triple[k * n + j];
        p = std::max(p, sup_sobolev_norm(wick_pair(psi[k], psi[j], ctx, same), -eps));
        q = std::max(q, sup_sobolev_norm(wick_triple(psi[k], psi[j], ctx, same), -eps));
      }
    });
  }
  z.first = a_n_norm(first);
  z.second_diag = a_n_norm(diag);
  z.second = a_n2_norm(pair, n);
  z.third = a_n2_norm(triple, n);
  return z;
}

double lln_sample(LlnKind kind, std::size_t n, const LlnConfig& cfg, std::uint64_t rep) {
  if (n == 0) throw std::invalid_argument("lln_sample: N must be positive");
  const GridSpec& spec = cfg.spec;
  const std::uint64_t root = hash_key({cfg.seed, static_cast<std::uint64_t>(n), rep});
  // Only P_M Ψ enters, so noise beyond M is never drawn.
  const StochasticTransition tr(spec, cfg.dt, cfg.M);
  std::vector<ConvolutionState> psi;
  psi.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    psi.push_back(ConvolutionState::zero(spec, NoiseStream{root, j, StreamKind::space_time_noise}, cfg.M));
  }
  const std::size_t steps = step_count(cfg.T, cfg.dt);
  const RenormConstants rc = RenormConstants::make(spec.mass, cfg.M, cfg.dt, steps);
  const std::size_t width = kind == LlnKind::wick_triple_avg_an ? n : 1;
  std::vector<std::vector<double>> sq(width);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<RealGrid> phys(n);
  for (std::size_t step = 0; step <= steps; ++step) {
    if (step > 0) {
      for (auto& p : psi) tr.advance(p);
    }
    const double c = rc.sigma_at(step);
    for (std::size_t j = 0; j < n; ++j) phys[j] = to_physical(psi[j].state.pos);
    const std::size_t points = phys.front().size();
    // Σ_k H_2(Ψ_k; c), component order.
    RealGrid h2(points, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < points; ++i) h2[i] += hermite(2, phys[k][i], c);
    }
    RealGrid x(points);
    switch (kind) {
      case LlnKind::wick_square_avg:
        for (std::size_t i = 0; i < points; ++i) x[i] = inv_n * h2[i];
        sq[0].push_back(std::pow(sup_sobolev_norm(from_physical(spec, x), -cfg.eps), 2));
        break;
      case LlnKind::wick_triple_avg:
      case LlnKind::wick_triple_avg_an:
        // Σ_k :Ψ_k² Ψ_j: = (Σ_k H_2(Ψ_k)) Ψ_j - 2c Ψ_j.
        for (std::size_t j = 0; j < width; ++j) {
          for (std::size_t i = 0; i < points; ++i) x[i] = inv_n * (h2[i] - 2.0 * c) * phys[j][i];
          sq[j].push_back(std::pow(sup_sobolev_norm(from_physical(spec, x), -cfg.eps), 2));
        }
        break;
    }
  }
  std::vector<double> per_component(width);
  for (std::size_t j = 0; j < width; ++j) per_component[j] = lln_norm_of_nodes(sq[j], cfg.dt);
  return width == 1 ? per_component.front() : a_n_norm(per_component);
}

std::vector<LlnRow> lln_estimator(LlnKind kind, const std::vector<std::size_t>& n_list, const LlnConfig& cfg) {
  if (n_list.empty()) throw std::invalid_argument("lln_estimator: empty N list");
  if (cfg.reps < 2) throw std::invalid_argument("lln_estimator: need at least 2 repetitions");
  std::vector<LlnRow> rows;
  for (std::size_t n : n_list) {
    std::vector<double> vals(cfg.reps);
    parallel_for(cfg.reps, [&](std::size_t r) { vals[r] = lln_sample(kind, n, cfg, r); });
    const double mean = pairwise_sum(vals) / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    rows.push_back(LlnRow{n, mean, sd / std::sqrt(static_cast<double>(vals.size()))});
  }
  return rows;
}

double commutator_value(const SpectralField& f, const SpectralField& g, double s, double M) {
  f.require_same_grid(g);
  const GridSpec& spec = f.spec();
  const RealGrid fp = to_physical(f);
  const RealGrid gp = to_physical(g);
  const RealGrid ifp = to_physical(apply_i_operator(f, s, M));
  const RealGrid igp = to_physical(apply_i_operator(g, s, M));
  RealGrid lhs(fp.size()), rhs(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i) {
    lhs[i] = fp[i] * fp[i] * gp[i];
    rhs[i] = ifp[i] * ifp[i] * igp[i];
  }
  const SpectralField diff = apply_i_operator(from_physical(spec, lhs), s, M) - from_physical(spec, rhs);
  return sobolev_norm(diff, 0.0);
}

SpectralField commutator_trial_field(const CommutatorConfig& cfg, double s, double M, std::uint64_t key) {
  if (6 * cfg.band + 1 > cfg.n_grid) throw std::invalid_argument("commutator: grid too small for the band");
  const GridSpec spec = GridSpec::make(cfg.n_grid, 1.0);
  const int band = cfg.band;
  SpectralField f = sample_gaussian_field(
      spec, kNoCutoff,
      [band](const Mode& n) {
        if (std::abs(n.k1) > band || std::abs(n.k2) > band) return 0.0;
        const double b = 1.0 + n.norm_sq();
        return 1.0 / (b * b);
      },
      key);
  const double norm = sobolev_norm(apply_i_operator(f, s, M), 1.0);
  f *= 1.0 / norm;
  return f;
}

std::vector<CommutatorRow> commutator_defect(double s, const std::vector<double>& m_list, std::size_t trials,
                                             const CommutatorConfig& cfg) {
  if (m_list.empty()) throw std::invalid_argument("commutator_defect: empty M list");
  std::vector<CommutatorRow> rows;
  for (double M : m_list) {
    std::vector<double> vals(trials);
    parallel_for(trials, [&](std::size_t t) {
      const auto tt = static_cast<std::uint64_t>(t);
      const std::uint64_t kind = static_cast<std::uint64_t>(StreamKind::trial_field);
      const SpectralField f = commutator_trial_field(cfg, s, M, hash_key({cfg.seed, kind, tt, 0}));
      const SpectralField g = commutator_trial_field(cfg, s, M, hash_key({cfg.seed, kind, tt, 1}));
      vals[t] = commutator_value(f, g, s, M);
    });
    rows.push_back(CommutatorRow{M, vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end())});
  }
  return rows;
}

DifferenceNorms difference_norms(const std::vector<ComponentEnsemble>& traj, const std::vector<ComponentEnsemble>& limit,
                                 double s, std::size_t j) {
  if (traj.size() != limit.size()) throw std::invalid_argument("difference_norms: node counts differ");
  DifferenceNorms out;
  if (traj.empty()) return out;
  const std::size_t n = traj.front().size();
  if (j >= n) throw std::out_of_range("difference_norms: component index");
  std::vector<double> ct(n, 0.0);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (traj[t].size() != n || limit[t].size() != n) throw std::invalid_argument("difference_norms: component counts");
    for (std::size_t k = 0; k < n; ++k) {
      const PairState d(traj[t][k].pos - limit[t][k].pos, traj[t][k].vel - limit[t][k].vel);
      ct[k] = std::max(ct[k], pair_sobolev_norm(d, s));
    }
  }
  out.c_t_norm = ct[j];
  out.an_norm = a_n_norm(ct);
  return out;
}

RateFit fit_rate(std::span<const double> n, std::span<const double> err) {
  if (n.size() != err.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (n.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  RateFit fit;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(err[i] > 0.0)) throw std::invalid_argument("fit_rate: values must be positive");
    fit.x.push_back(std::log(n[i]));
    fit.y.push_back(std::log(err[i]));
  }
  const double k = static_cast<double>(n.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    mx += fit.x[i];
    my += fit.y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    sxx += (fit.x[i] - mx) * (fit.x[i] - mx);
    sxy += (fit.x[i] - mx) * (fit.y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: N values must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double r = fit.y[i] - fit.intercept - fit.slope * fit.x[i];
    rss += r * r;
  }
  fit.slope_se = k > 2.0 ? std::sqrt(rss / (k - 2.0) / sxx) : 0.0;
  return fit;
}

}  // namespace sigwave
