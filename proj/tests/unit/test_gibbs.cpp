#include <doctest.h>

#include <cmath>
#include <vector>

#include "sigwave/gibbs.hpp"
#include "sigwave/noise.hpp"
#include "sigwave/stats.hpp"
#include "sigwave/wick.hpp"
#include "support.hpp"

using namespace sigwave;

namespace {

GibbsSamplerConfig small_config() {
  GibbsSamplerConfig cfg;
  cfg.n_grid = 8;
  cfg.N = 2;
  cfg.M = 2.0;
  cfg.h = 0.3;
  cfg.chain = 200;
  cfg.burnin = 50;
  cfg.seed = 12;
  return cfg;
}

std::vector<SpectralField> random_positions(const GridSpec& g, std::size_t n, double M, std::uint64_t key) {
  std::vector<SpectralField> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(testing::random_field(g, M, 1.0, key + j));
  return out;
}

double inner(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
  return s;
}

// Mean with a standard error inflated by the integrated autocorrelation time.
MeanSe correlated_mean(const std::vector<double>& x) {
  MeanSe m = mean_se(x);
  m.se *= std::sqrt(integrated_autocorrelation_time(x));
  return m;
}

}  // namespace

TEST_CASE("potential at zero") {
  const GridSpec g = GridSpec::make(8, 1.0);
  const double a = 1.7;
  CHECK(gibbs_potential(std::vector<SpectralField>(2, SpectralField(g)), a) == doctest::Approx(a * a).epsilon(1e-14));
  CHECK(gibbs_potential(std::vector<SpectralField>(1, SpectralField(g)), a) ==
        doctest::Approx(0.75 * a * a).epsilon(1e-14));
  CHECK_THROWS_AS(gibbs_potential(std::vector<SpectralField>{}, a), std::invalid_argument);
}

TEST_CASE("potential matches a direct double loop") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const double a = 0.9;
  const auto u = random_positions(g, 3, 4.0, 30);
  std::vector<RealGrid> x;
  for (const auto& f : u) x.push_back(to_physical(f));
  double total = 0.0;
  for (std::size_t i = 0; i < x[0].size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t j = 0; j < 3; ++j) {
        total += k == j ? hermite(4, x[j][i], a) : hermite(2, x[k][i], a) * hermite(2, x[j][i], a);
      }
    }
  }
  total /= static_cast<double>(x[0].size()) * 12.0;
  CHECK(gibbs_potential(u, a) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("drift is minus the gradient of the potential") {
  const GridSpec g = GridSpec::make(8, 1.0);
  const double a = alpha_m(1.0, 2.0);
  CHECK(testing::max_abs(gibbs_drift(std::vector<SpectralField>(2, SpectralField(g)), a)[1]) == 0.0);

  const SpectralField one = testing::random_field(g, 2.0, 1.0, 5);
  const RealGrid d1 = to_physical(gibbs_drift({one}, a)[0]), x1 = to_physical(one);
  for (std::size_t i = 0; i < x1.size(); ++i) CHECK(d1[i] == doctest::Approx(-hermite(3, x1[i], a)).epsilon(1e-12));

  const auto u = random_positions(g, 3, 2.0, 50);
  const auto drift = gibbs_drift(u, a);
  const double eps = 1e-5;
  for (std::size_t j = 0; j < 3; ++j) {
    const SpectralField dir = testing::random_field(g, 2.0, 0.5, 90 + j);
    auto plus = u, minus = u;
    plus[j] += eps * dir;
    minus[j] -= eps * dir;
    const double fd = (gibbs_potential(plus, a) - gibbs_potential(minus, a)) / (2 * eps);
    const double an = -inner(drift[j], dir);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
  }
}

TEST_CASE("Wick square integral") {
  const GridSpec g = GridSpec::make(8, 1.0);
  SpectralField f(g);
  f.at(0, 0) = 2.0;
  f.at(1, 0) = Complex(0.0, 1.0);
  f.at(-1, 0) = Complex(0.0, -1.0);
  CHECK(wick_square_integral(f, 0.5) == doctest::Approx(4.0 + 2.0 - 0.5));
}

TEST_CASE("sampler configuration is validated") {
  auto bad = [](auto mutate) {
    GibbsSamplerConfig c = small_config();
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(small_config().validate());
  CHECK_THROWS_WITH_AS(bad([](auto& c) { c.N = 0; }).validate(), doctest::Contains("gibbs.N"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad([](auto& c) { c.h = 0.0; }).validate(), doctest::Contains("gibbs.h"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad([](auto& c) { c.burnin = c.chain; }).validate(), doctest::Contains("gibbs.burnin"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad([](auto& c) { c.thin = 0; }).validate(), doctest::Contains("gibbs.thin"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad([](auto& c) { c.M = -1.0; }).validate(), doctest::Contains("truncation.M"),
                       std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.accept_lo = 0.9; }).validate(), std::invalid_argument);
}

TEST_CASE("chain states stay real and inside the truncation") {
  GibbsChain chain(small_config(), 3);
  for (int s = 0; s < 40; ++s) chain.step();
  for (const auto& f : chain.positions()) {
    CHECK(f.hermitian_defect() <= 1e-15);
    CHECK(testing::max_diff(f, project(f, 2.0)) == 0.0);
    CHECK(f.at(f.spec().nyquist(), 1) == Complex{});
  }
  CHECK(chain.steps() == 40);
  CHECK(chain.accepted() <= 40);
}

TEST_CASE("without interaction the proposal is reversible and always accepted") {
  GibbsSamplerConfig cfg = small_config();
  cfg.interaction = false;
  GibbsChain chain(cfg, 1);
  const GridSpec g = cfg.spec();
  const auto u = chain.positions();
  const auto w = random_positions(g, 2, 2.0, 77);
  GibbsChain probe(cfg, 1, w);
  const auto wp = probe.positions();
  const double forward = chain.log_target(u) + chain.log_proposal(u, wp);
  const double backward = chain.log_target(wp) + chain.log_proposal(wp, u);
  CHECK(forward == doctest::Approx(backward).epsilon(1e-12));
  for (int s = 0; s < 300; ++s) CHECK(chain.step());
  CHECK(chain.accepted() == 300);
}

TEST_CASE("proposal density peaks at the proposal mean") {
  GibbsChain chain(small_config(), 4);
  const auto u = chain.positions();
  const auto mean = chain.proposal_mean(u);
  const double top = chain.log_proposal(u, mean);
  CHECK(top == doctest::Approx(0.0).epsilon(1e-15));
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto shifted = mean;
    shifted[0] += 0.1 * testing::random_field(chain.positions()[0].spec(), 2.0, 1.0, 400 + k);
    CHECK(chain.log_proposal(u, shifted) < top);
  }
}

TEST_CASE("linear chain reproduces the Gaussian mode variances") {
  GibbsSamplerConfig cfg = small_config();
  cfg.interaction = false;
  cfg.N = 1;
  cfg.h = 1.0;
  cfg.chain = 4500;
  cfg.burnin = 500;
  cfg.thin = 2;
  const GibbsRun run = sample_gibbs(cfg);
  CHECK(run.samples.size() == 2000);
  CHECK(run.trace.size() == 4000);
  CHECK(run.acceptance == 1.0);
  CHECK_FALSE(run.warning.empty());
  for (const Mode n : {Mode{0, 0}, Mode{1, 0}, Mode{1, 1}, Mode{0, 2}}) {
    const ModeVarianceReport r = gibbs_vs_gaussian_covariance(run.samples, 0, n, cfg.M);
    CHECK(r.gaussian == doctest::Approx(1.0 / (1.0 + n.norm_sq())));
    CHECK(std::abs(r.variance - r.gaussian) <= 5.0 * r.se);
  }
  const ModeVarianceReport outside = gibbs_vs_gaussian_covariance(run.samples, 0, Mode{2, 1}, cfg.M);
  CHECK(outside.gaussian == 0.0);
  CHECK(outside.variance == 0.0);
}

TEST_CASE("sampler runs are reproducible") {
  const GibbsRun a = sample_gibbs(small_config(), 2), b = sample_gibbs(small_config(), 2);
  const GibbsRun c = sample_gibbs(small_config(), 3);
  CHECK(a.trace == b.trace);
  CHECK(a.trace != c.trace);
  CHECK(a.acceptance > 0.0);
}

TEST_CASE("single-mode chain samples the quartic density") {
  GibbsSamplerConfig cfg;
  cfg.n_grid = 8;
  cfg.N = 1;
  cfg.M = 0.0;
  cfg.h = 0.5;
  cfg.seed = 3;
  const double m = cfg.m, a = cfg.alpha();
  CHECK(a == doctest::Approx(1.0 / m));
  auto density = [&](double x) {
    return std::exp(-(std::pow(x, 4) - 6 * a * x * x + 3 * a * a) / 4 - 0.5 * m * x * x);
  };
  // Unit panels, so no panel sees the integrand vanish at all its nodes.
  auto integrate = [&](int power) {
    double acc = 0.0;
    for (int k = -12; k < 12; ++k) {
      acc += testing::simpson([&](double x) { return std::pow(x, power) * density(x); }, k, k + 1, 1e-14);
    }
    return acc;
  };
  const double z = integrate(0), second = integrate(2) / z, fourth = integrate(4) / z;

  GibbsChain chain(cfg, 0);
  std::vector<double> x2, x4;
  for (int s = 0; s < 60000; ++s) {
    chain.step();
    if (s < 1000) continue;
    const double x = chain.positions()[0].at(0, 0).real();
    x2.push_back(x * x);
    x4.push_back(std::pow(x, 4));
  }
  const MeanSe m2 = correlated_mean(x2), m4 = correlated_mean(x4);
  MESSAGE("E[x^2] " << m2.mean << " +- " << m2.se << " vs " << second << "; E[x^4] " << m4.mean << " vs " << fourth);
  CHECK(std::abs(m2.mean - second) <= 4 * m2.se);
  CHECK(std::abs(m4.mean - fourth) <= 4 * m4.se);
}

TEST_CASE("low-mode variance matches an importance-sampling oracle") {
  GibbsSamplerConfig cfg;
  cfg.n_grid = 8;
  cfg.N = 1;
  cfg.M = 1.0;
  cfg.h = 0.1;
  cfg.seed = 8;
  const GridSpec g = cfg.spec();
  const double a = cfg.alpha(), m = cfg.m;

  // Self-normalized weights exp(-V) on Gaussian reference draws.
  const std::size_t draws = 1000000;
  std::vector<double> w(draws), y(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    const SpectralField u =
        sample_gaussian_field(g, cfg.M, [m](const Mode& n) { return 1.0 / (m + n.norm_sq()); }, 9000 + d);
    w[d] = std::exp(-gibbs_potential({u}, a));
    y[d] = std::norm(u.at(1, 0));
  }
  double sw = 0.0, swy = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    sw += w[d];
    swy += w[d] * y[d];
  }
  const double oracle = swy / sw;
  double var = 0.0;
  for (std::size_t d = 0; d < draws; ++d) var += w[d] * w[d] * (y[d] - oracle) * (y[d] - oracle);
  const double oracle_se = std::sqrt(var) / sw;

  GibbsChain chain(cfg, 0);
  std::vector<double> trace;
  for (int s = 0; s < 400000; ++s) {
    chain.step();
    if (s >= 2000) trace.push_back(std::norm(chain.positions()[0].at(1, 0)));
  }
  const MeanSe est = correlated_mean(trace);
  MESSAGE("E|u(1,0)|^2: chain " << est.mean << " +- " << est.se << ", oracle " << oracle << " +- " << oracle_se
                                << ", Gaussian " << 1.0 / (m + 1.0) << ", acceptance "
                                << static_cast<double>(chain.accepted()) / chain.steps());
  CHECK(std::abs(est.mean - oracle) <= 4 * std::hypot(est.se, oracle_se));
}

TEST_CASE("invariance check at T = 0 is trivial; the linear flow preserves the reference measure") {
  InvarianceConfig cfg;
  cfg.sampler = small_config();
  cfg.sampler.chain = 30;
  cfg.sampler.burnin = 0;
  cfg.samples = 20;
  cfg.T = 0.0;
  const InvarianceReport zero = invariance_check(cfg);
  REQUIRE(zero.observables.size() == 3);
  for (const auto& o : zero.observables) {
    CHECK(o.ks_statistic == 0.0);
    CHECK(o.mean0 == o.mean_t);
  }

  cfg.sampler.interaction = false;
  cfg.sampler.h = 1.0;
  cfg.samples = 300;
  cfg.T = 0.5;
  cfg.dt = 0.05;
  const InvarianceReport lin = invariance_check(cfg);
  CHECK(lin.acceptance == 1.0);
  for (const auto& o : lin.observables) {
    MESSAGE(o.name << ": " << o.mean0 << " -> " << o.mean_t << ", KS p " << o.ks_p);
    CHECK(o.ks_p > 1e-3);
  }
}

TEST_CASE("velocities are unit white noise inside the truncation") {
  const GibbsSamplerConfig cfg = small_config();
  std::vector<double> inside;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const auto v = sample_velocities(cfg, 0, s);
    REQUIRE(v.size() == cfg.N);
    inside.push_back(std::norm(v[1].at(1, 1)));
    CHECK(v[0].at(2, 1) == Complex{});
  }
  const MeanSe ms = mean_se(inside);
  CHECK(std::abs(ms.mean - 1.0) <= 4 * ms.se);
}
