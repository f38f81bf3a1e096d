#include "sigwave/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sigwave/dynamics.hpp"
#include "sigwave/noise.hpp"
#include "sigwave/parallel.hpp"
#include "sigwave/rng.hpp"
#include "sigwave/snapshot.hpp"
#include "sigwave/stats.hpp"

namespace sigwave {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << format_double(cells[i]);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

std::filesystem::path prepare(const ExperimentConfig& cfg) {
  const std::filesystem::path dir = cfg.raw("output.dir");
  std::filesystem::create_directories(dir);
  return dir;
}

bool wants_snapshots(const ExperimentConfig& cfg) {
  const std::string& f = cfg.raw("output.formats");
  for (const auto& part : {std::string("csv"), std::string("csv,snapshots"), std::string("snapshots,csv")}) {
    if (f == part) return f.find("snapshots") != std::string::npos;
  }
  throw ConfigError("output.formats: expected csv or csv,snapshots, got '" + f + "'");
}

GridSpec grid_from(const ExperimentConfig& cfg) {
  const auto n = cfg.get_int("grid.n_grid");
  try {
    return GridSpec::make(static_cast<int>(n), cfg.get_double("grid.m"));
  } catch (const GridError& e) {
    throw ConfigError(std::string("grid.n_grid / grid.m: ") + e.what());
  }
}

double positive(const ExperimentConfig& cfg, const std::string& key) {
  const double v = cfg.get_double(key);
  if (!(v > 0.0)) throw ConfigError(key + " must be positive");
  return v;
}

double nonnegative(const ExperimentConfig& cfg, const std::string& key) {
  const double v = cfg.get_double(key);
  if (!(v >= 0.0)) throw ConfigError(key + " must be non-negative");
  return v;
}

std::size_t positive_size(const ExperimentConfig& cfg, const std::string& key) {
  const std::size_t v = cfg.get_size(key);
  if (v == 0) throw ConfigError(key + " must be positive");
  return v;
}

IntegratorSettings settings_from(const ExperimentConfig& cfg) {
  return IntegratorSettings{positive(cfg, "dynamics.dt"), cfg.get_bool("dynamics.dealias"), kNoCutoff};
}

TrajectoryConfig trajectory_from(const ExperimentConfig& cfg) {
  TrajectoryConfig t;
  t.T = nonnegative(cfg, "dynamics.T");
  t.stride = positive_size(cfg, "dynamics.stride");
  t.s = cfg.get_double("experiment.s");
  t.eps = cfg.get_double("experiment.eps");
  t.i_s = t.s;
  t.i_M = std::max(1.0, nonnegative(cfg, "truncation.M"));
  t.keep_snapshots = wants_snapshots(cfg);
  return t;
}

std::vector<PairState> initial_residual(const ExperimentConfig& cfg, const GridSpec& spec, std::size_t n, double M,
                                        std::uint64_t seed) {
  const std::string data = cfg.raw("dynamics.data");
  std::vector<PairState> out;
  if (data == "zero") {
    out.assign(n, PairState(spec));
  } else if (data == "gaussian") {
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back(sample_mu1_mu0_pair(spec, M, NoiseStream{seed, j, StreamKind::generic}));
    }
  } else if (data == "file") {
    const auto fields = read_snapshots(cfg.raw("dynamics.data_file"), spec.mass);
    if (fields.size() != 2 * n) {
      throw ConfigError("dynamics.data_file: expected " + std::to_string(2 * n) + " records, found " +
                        std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(fields[j].spec() == spec)) throw ConfigError("dynamics.data_file: grid differs from grid.n_grid");
      out.emplace_back(fields[j], fields[n + j]);
    }
  } else {
    throw ConfigError("dynamics.data: expected zero, gaussian or file, got '" + data + "'");
  }
  return out;
}

void write_record(const TrajectoryRecord& rec, const std::filesystem::path& dir, const std::string& stem,
                  CommandResult& res) {
  rec.write_csv((dir / (stem + ".csv")).string());
  res.outputs.push_back(stem + ".csv");
  if (!rec.snapshots.empty()) {
    std::vector<SpectralField> flat;
    for (const auto& node : rec.snapshots) flat.insert(flat.end(), node.begin(), node.end());
    write_snapshots((dir / (stem + ".bin")).string(), flat);
    res.outputs.push_back(stem + ".bin");
  }
}

void write_fit(const std::filesystem::path& dir, const std::string& name, const RateFit& fit, CommandResult& res) {
  CsvWriter w(dir / name, {"x", "y"});
  for (std::size_t i = 0; i < fit.x.size(); ++i) w.row(std::vector<double>{fit.x[i], fit.y[i]});
  res.outputs.push_back(name);
  res.results["slope"] = format_double(fit.slope);
  res.results["intercept"] = format_double(fit.intercept);
  res.results["slope_se"] = format_double(fit.slope_se);
}

RateFit fit_rows(const std::vector<LlnRow>& rows) {
  std::vector<double> n, e;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.N));
    e.push_back(r.mean_norm);
  }
  return fit_rate(n, e);
}

void write_rows(const std::filesystem::path& path, const std::vector<LlnRow>& rows) {
  CsvWriter w(path, {"N", "mean_norm", "se"});
  for (const auto& r : rows) w.row(std::vector<std::string>{std::to_string(r.N), format_double(r.mean_norm), format_double(r.se)});
}

void finish(const ExperimentConfig& cfg, const std::string& command, CommandResult& res) {
  if (!res.warning.empty()) res.results["warning"] = res.warning;
  write_manifest(res.dir, command, cfg, res.outputs, res.results);
}

std::vector<std::size_t> n_list_from(const ExperimentConfig& cfg) {
  const auto list = cfg.get_size_list("experiment.N_list");
  for (std::size_t n : list) {
    if (n == 0) throw ConfigError("experiment.N_list: entries must be positive");
  }
  return list;
}

}  // namespace

GibbsSamplerConfig sampler_from(const ExperimentConfig& cfg) {
  GibbsSamplerConfig g;
  const GridSpec spec = grid_from(cfg);
  g.n_grid = spec.n_grid;
  g.m = spec.mass;
  g.N = positive_size(cfg, "gibbs.N");
  g.M = nonnegative(cfg, "truncation.M");
  g.h = positive(cfg, "gibbs.h");
  g.chain = positive_size(cfg, "gibbs.chain");
  g.burnin = cfg.get_size("gibbs.burnin");
  g.thin = positive_size(cfg, "gibbs.thin");
  g.interaction = cfg.get_bool("gibbs.interaction");
  const std::string method = cfg.raw("gibbs.method");
  if (method == "pcnl") {
    g.method = SamplerMethod::pcnl;
  } else if (method == "parabolic") {
    g.method = SamplerMethod::parabolic;
  } else {
    throw ConfigError("gibbs.method: expected pcnl or parabolic, got '" + method + "'");
  }
  g.seed = cfg.get_u64("experiment.seed");
  if (g.burnin >= g.chain) throw ConfigError("gibbs.burnin must be smaller than gibbs.chain");
  return g;
}

LlnKind lln_kind_from(const std::string& name) {
  if (name == "wick_square_avg") return LlnKind::wick_square_avg;
  if (name == "wick_triple_avg") return LlnKind::wick_triple_avg;
  if (name == "wick_triple_avg_an") return LlnKind::wick_triple_avg_an;
  throw ConfigError("experiment.kind: unknown estimator '" + name + "'");
}

CommandResult cmd_renorm_table(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  const GridSpec spec = grid_from(cfg);
  const double M = nonnegative(cfg, "truncation.M");
  const double t_max = nonnegative(cfg, "experiment.t_max");
  const double t_step = positive(cfg, "experiment.t_step");
  const double alpha = alpha_m(spec.mass, M);
  CsvWriter w(res.dir / "renorm_table.csv", {"t", "sigma_M", "alpha_M"});
  const std::size_t count = step_count(t_max, t_step);
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = static_cast<double>(k) * t_step;
    w.row(std::vector<double>{t, sigma_m(t, spec.mass, M), alpha});
  }
  res.outputs.push_back("renorm_table.csv");
  res.results["alpha_M"] = format_double(alpha);
  finish(cfg, "renorm-table", res);
  return res;
}

CommandResult cmd_simulate_hlsm(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  const GridSpec spec = grid_from(cfg);
  const std::size_t n = positive_size(cfg, "dynamics.N");
  const double M = nonnegative(cfg, "truncation.M");
  const std::uint64_t seed = cfg.get_u64("experiment.seed");
  const IntegratorSettings settings = settings_from(cfg);
  const TrajectoryConfig tc = trajectory_from(cfg);
  HlsmState state = make_hlsm_state(spec, n, M, settings, seed, step_count(tc.T, settings.dt));
  const auto v0 = initial_residual(cfg, spec, n, M, seed);
  state.v = ComponentEnsemble(v0);
  const TrajectoryRecord rec = run_trajectory(state, tc);
  write_record(rec, res.dir, "hlsm_trajectory", res);
  res.results["final_v1_hs"] = format_double(rec.rows.back()[2]);
  finish(cfg, "simulate-hlsm", res);
  return res;
}

CommandResult cmd_simulate_meanfield(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  const GridSpec spec = grid_from(cfg);
  const std::size_t r = positive_size(cfg, "dynamics.R");
  const double M = nonnegative(cfg, "truncation.M");
  const std::uint64_t seed = cfg.get_u64("experiment.seed");
  const IntegratorSettings settings = settings_from(cfg);
  const TrajectoryConfig tc = trajectory_from(cfg);
  MeanFieldState state = make_meanfield_state(spec, r, M, settings, seed, cfg.get_bool("dynamics.stationary"));
  state.v = initial_residual(cfg, spec, r, M, seed);
  const TrajectoryRecord rec = run_trajectory(state, tc);
  write_record(rec, res.dir, "meanfield_trajectory", res);
  res.results["final_v1_hs"] = format_double(rec.rows.back()[1]);
  finish(cfg, "simulate-meanfield", res);
  return res;
}

double convergence_sample(const ConvergenceConfig& cfg, std::size_t n, std::uint64_t rep) {
  const GridSpec spec = GridSpec::make(cfg.n_grid, cfg.m);
  const std::uint64_t root = hash_key({cfg.seed, static_cast<std::uint64_t>(n), rep});
  HlsmState state;
  state.v = ComponentEnsemble(spec, n);
  for (std::size_t j = 0; j < n; ++j) {
    state.psi.push_back(
        ConvolutionState::stationary(spec, NoiseStream{root, j, StreamKind::space_time_noise}, cfg.M));
  }
  state.renorm = RenormConstants::make(cfg.m, cfg.M, cfg.dt, 0);
  state.schedule = WickSchedule::alpha;
  state.settings = IntegratorSettings{cfg.dt, true, cfg.M};
  const HlsmStepper stepper(spec, state.settings, cfg.M);
  const std::size_t burn = step_count(cfg.burn_in, cfg.dt);
  const std::size_t steps = step_count(cfg.T, cfg.dt);
  for (std::size_t k = 0; k < burn; ++k) stepper.step(state);
  double worst = pair_sobolev_norm(state.v[0], cfg.s);
  for (std::size_t k = 0; k < steps; ++k) {
    stepper.step(state);
    worst = std::max(worst, pair_sobolev_norm(state.v[0], cfg.s));
  }
  return worst;
}

std::vector<LlnRow> convergence_table(const ConvergenceConfig& cfg) {
  if (cfg.n_list.empty()) throw std::invalid_argument("convergence: empty N list");
  if (cfg.reps < 2) throw std::invalid_argument("convergence: need at least 2 repetitions");
  std::vector<LlnRow> rows;
  for (std::size_t n : cfg.n_list) {
    std::vector<double> vals(cfg.reps);
    parallel_for(cfg.reps, [&](std::size_t r) { vals[r] = convergence_sample(cfg, n, r); });
    const MeanSe ms = mean_se(vals);
    rows.push_back(LlnRow{n, ms.mean, ms.se});
  }
  return rows;
}

CommandResult cmd_convergence_rate(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  ConvergenceConfig cc;
  const GridSpec spec = grid_from(cfg);
  cc.n_grid = spec.n_grid;
  cc.m = spec.mass;
  cc.M = nonnegative(cfg, "truncation.M");
  cc.seed = cfg.get_u64("experiment.seed");
  cc.burn_in = nonnegative(cfg, "dynamics.burn_in");
  cc.n_list = n_list_from(cfg);
  cc.reps = positive_size(cfg, "experiment.reps");
  cc.T = nonnegative(cfg, "dynamics.T");
  cc.dt = positive(cfg, "dynamics.dt");
  cc.s = cfg.get_double("experiment.s");
  const auto rows = convergence_table(cc);
  write_rows(res.dir / "convergence.csv", rows);
  res.outputs.push_back("convergence.csv");
  if (rows.size() >= 3) {
    write_fit(res.dir, "convergence_fit.csv", fit_rows(rows), res);
  } else {
    res.warning = "fewer than 3 ensemble sizes; no rate fit";
  }
  finish(cfg, "convergence-rate", res);
  return res;
}

CommandResult cmd_lln_decay(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  LlnConfig lc;
  lc.spec = grid_from(cfg);
  lc.M = nonnegative(cfg, "truncation.M");
  lc.T = nonnegative(cfg, "dynamics.T");
  lc.dt = positive(cfg, "dynamics.dt");
  lc.reps = positive_size(cfg, "experiment.reps");
  lc.eps = cfg.get_double("experiment.eps");
  lc.seed = cfg.get_u64("experiment.seed");
  const auto rows = lln_estimator(lln_kind_from(cfg.raw("experiment.kind")), n_list_from(cfg), lc);
  write_rows(res.dir / "lln.csv", rows);
  res.outputs.push_back("lln.csv");
  if (rows.size() >= 3) {
    write_fit(res.dir, "lln_fit.csv", fit_rows(rows), res);
  } else {
    res.warning = "fewer than 3 ensemble sizes; no rate fit";
  }
  finish(cfg, "lln-decay", res);
  return res;
}

CommandResult cmd_sample_gibbs(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  const GibbsSamplerConfig sc = sampler_from(cfg);
  const GibbsRun run = sample_gibbs(sc, 0);
  {
    CsvWriter w(res.dir / "gibbs_trace.csv", {"step", "wick_square_u1"});
    for (std::size_t k = 0; k < run.trace.size(); ++k) {
      w.row(std::vector<std::string>{std::to_string(sc.burnin + k), format_double(run.trace[k])});
    }
    res.outputs.push_back("gibbs_trace.csv");
  }
  if (run.samples.size() >= 2) {
    CsvWriter w(res.dir / "gibbs_modes.csv", {"k1", "k2", "variance", "se", "gaussian"});
    const int r = static_cast<int>(std::floor(sc.M));
    for (int k1 = 0; k1 <= r; ++k1) {
      for (int k2 = -r; k2 <= r; ++k2) {
        const Mode n{k1, k2};
        if (!is_canonical(n) || !within_radius(n, sc.M)) continue;
        if (k1 >= sc.n_grid / 2 || std::abs(k2) >= sc.n_grid / 2) continue;
        const auto rep = gibbs_vs_gaussian_covariance(run.samples, 0, n, sc.M);
        w.row(std::vector<std::string>{std::to_string(k1), std::to_string(k2), format_double(rep.variance),
                                       format_double(rep.se), format_double(rep.gaussian)});
      }
    }
    res.outputs.push_back("gibbs_modes.csv");
  }
  if (wants_snapshots(cfg)) {
    std::vector<SpectralField> flat;
    for (const auto& s : run.samples) {
      for (const auto& p : s.components) flat.push_back(p.pos);
      for (const auto& p : s.components) flat.push_back(p.vel);
    }
    write_snapshots((res.dir / "gibbs_samples.bin").string(), flat);
    res.outputs.push_back("gibbs_samples.bin");
  }
  res.results["acceptance"] = format_double(run.acceptance);
  res.results["iat"] = format_double(run.iat);
  res.results["samples"] = std::to_string(run.samples.size());
  res.warning = run.warning;
  finish(cfg, "sample-gibbs", res);
  return res;
}

CommandResult cmd_invariance(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  InvarianceConfig ic;
  ic.sampler = sampler_from(cfg);
  ic.samples = positive_size(cfg, "gibbs.samples");
  ic.T = nonnegative(cfg, "gibbs.T");
  ic.dt = positive(cfg, "gibbs.dt");
  const InvarianceReport rep = invariance_check(ic);
  {
    CsvWriter w(res.dir / "invariance.csv", {"observable", "mean0", "se0", "mean_T", "se_T", "ks_statistic", "ks_p"});
    for (const auto& o : rep.observables) {
      w.row(std::vector<std::string>{o.name, format_double(o.mean0), format_double(o.se0), format_double(o.mean_t),
                                     format_double(o.se_t), format_double(o.ks_statistic), format_double(o.ks_p)});
    }
    res.outputs.push_back("invariance.csv");
  }
  {
    std::vector<std::string> header{"sample"};
    for (const auto& o : rep.observables) {
      header.push_back(o.name + "_0");
      header.push_back(o.name + "_T");
    }
    CsvWriter w(res.dir / "invariance_samples.csv", header);
    for (std::size_t s = 0; s < ic.samples; ++s) {
      std::vector<std::string> cells{std::to_string(s)};
      for (std::size_t o = 0; o < rep.observables.size(); ++o) {
        cells.push_back(format_double(rep.at_start[o][s]));
        cells.push_back(format_double(rep.at_end[o][s]));
      }
      w.row(cells);
    }
    res.outputs.push_back("invariance_samples.csv");
  }
  res.results["acceptance"] = format_double(rep.acceptance);
  res.results["ks_p_wick_square_u1"] = format_double(rep.observables.front().ks_p);
  if (rep.acceptance < ic.sampler.accept_lo || rep.acceptance > ic.sampler.accept_hi) {
    res.warning = "mean acceptance " + format_double(rep.acceptance) + " outside the target band";
  }
  finish(cfg, "invariance-check", res);
  return res;
}

CommandResult cmd_commutator(const ExperimentConfig& cfg) {
  CommandResult res{prepare(cfg), {}, {}, {}};
  CommutatorConfig cc;
  cc.n_grid = static_cast<int>(cfg.get_int("experiment.commutator_grid"));
  cc.band = static_cast<int>(cfg.get_int("experiment.commutator_band"));
  cc.seed = cfg.get_u64("experiment.seed");
  if (cc.band < 1 || 6 * cc.band + 1 > cc.n_grid) {
    throw ConfigError("experiment.commutator_band: need 1 <= band and 6 band + 1 <= commutator_grid");
  }
  const double s = cfg.get_double("experiment.s");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("experiment.s must lie in (0, 1) for the commutator sweep");
  const auto m_list = cfg.get_double_list("experiment.M_list");
  for (double M : m_list) {
    if (!(M >= 1.0)) throw ConfigError("experiment.M_list: entries must be >= 1");
  }
  const auto rows = commutator_defect(s, m_list, positive_size(cfg, "experiment.trials"), cc);
  {
    CsvWriter w(res.dir / "commutator.csv", {"M", "defect_max"});
    for (const auto& r : rows) w.row(std::vector<double>{r.M, r.defect_max});
    res.outputs.push_back("commutator.csv");
  }
  if (rows.size() >= 3) {
    std::vector<double> m, d;
    for (const auto& r : rows) {
      m.push_back(r.M);
      d.push_back(r.defect_max);
    }
    write_fit(res.dir, "commutator_fit.csv", fit_rate(m, d), res);
  }
  finish(cfg, "commutator", res);
  return res;
}

}  // namespace sigwave
