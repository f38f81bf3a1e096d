#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sigwave/diagnostics.hpp"
#include "sigwave/parallel.hpp"
#include "sigwave/rng.hpp"
#include "sigwave/stats.hpp"
#include "sigwave/wick.hpp"
#include "support.hpp"

using namespace sigwave;

namespace {

ComponentEnsemble random_ensemble(const GridSpec& g, std::size_t n, double amp, std::uint64_t key) {
  ComponentEnsemble e(g, n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = testing::random_pair(g, 4.0, key + 17 * j);
    e[j].pos *= amp;
    e[j].vel *= amp;
  }
  return e;
}

LlnConfig small_lln() {
  LlnConfig cfg;
  cfg.spec = GridSpec::make(16, 1.0);
  cfg.M = 4.0;
  cfg.T = 0.2;
  cfg.dt = 0.05;
  cfg.reps = 16;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("energy of simple configurations") {
  const double m = 1.5;
  const GridSpec g = GridSpec::make(16, m);
  CHECK(energy_en(ComponentEnsemble(g, 3), m) == 0.0);
  CHECK_THROWS_AS(energy_en(ComponentEnsemble{}, m), std::invalid_argument);

  ComponentEnsemble c(g, 1);
  c[0].pos.at(0, 0) = 0.7;
  c[0].vel.at(0, 0) = -0.4;
  CHECK(energy_en(c, m) == doctest::Approx(0.5 * (m * 0.49 + 0.16) + 0.25 * std::pow(0.7, 4)).epsilon(1e-14));

  // a cos x: quadratic part (m+1)a²/4, quartic part (3/32)a⁴.
  const double a = 0.9;
  ComponentEnsemble w(g, 1);
  w[0].pos = testing::from_function(g, [a](double x, double) { return a * std::cos(x); });
  CHECK(energy_en(w, m) == doctest::Approx((m + 1) * a * a / 4 + 3.0 / 32 * std::pow(a, 4)).epsilon(1e-13));
}

TEST_CASE("energies of repeated and mirrored copies") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const ComponentEnsemble one = random_ensemble(g, 1, 1.0, 3);
  const ComponentEnsemble three(std::vector<PairState>(3, one[0]));
  CHECK(energy_en(three, 1.0) == doctest::Approx(energy_en(one, 1.0)).epsilon(1e-14));
  CHECK(energy_meanfield(three, 1.0) == doctest::Approx(energy_en(one, 1.0)).epsilon(1e-14));
  const ComponentEnsemble mirrored({one[0], PairState(-1.0 * one[0].pos, -1.0 * one[0].vel)});
  CHECK(energy_meanfield(mirrored, 1.0) == doctest::Approx(energy_en(one, 1.0)).epsilon(1e-14));

  // The component average and the replica expectation share one formula.
  const ComponentEnsemble mixed = random_ensemble(g, 5, 1.0, 40);
  CHECK(energy_meanfield(mixed, 1.0) == doctest::Approx(energy_en(mixed, 1.0)).epsilon(1e-13));
}

TEST_CASE("modified energy") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const ComponentEnsemble e = random_ensemble(g, 2, 1.0, 9);
  CHECK(modified_energy(e, 1.0, 0.9, 100.0) == energy_en(e, 1.0));
  CHECK(modified_energy(ComponentEnsemble(g, 2), 1.0, 0.9, 2.0) == 0.0);
  // Small data on |n| <= 4: the quadratic part dominates and grows with M until I is the identity.
  const ComponentEnsemble small = random_ensemble(g, 2, 0.1, 19);
  double prev = 0.0;
  for (double M : {0.5, 1.0, 2.0, 3.0}) {
    const double cur = modified_energy(small, 1.0, 0.7, M);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(prev < energy_en(small, 1.0));
  CHECK(modified_energy(small, 1.0, 0.7, 4.0) == energy_en(small, 1.0));
}

TEST_CASE("enhanced-data norm") {
  const GridSpec g = GridSpec::make(16, 1.0);
  CHECK(zn_norm(EnhancedData{}, 0.1).total() == 0.0);

  EnhancedData zero;
  zero.psi.push_back(std::vector<SpectralField>(2, SpectralField(g)));
  zero.variance = {0.0};
  CHECK(zn_norm(zero, 0.1).total() == 0.0);
  zero.variance.clear();
  CHECK_THROWS_AS(zn_norm(zero, 0.1), std::invalid_argument);

  EnhancedData d;
  d.M = 4.0;
  for (int t = 0; t < 2; ++t) {
    d.psi.push_back({testing::random_field(g, kNoCutoff, 1.0, 10 + t), testing::random_field(g, kNoCutoff, 1.0, 20 + t)});
    d.variance.push_back(0.3 + 0.1 * t);
  }
  const ZnNorm z = zn_norm(d, 0.1);

  // Direct recomputation of the first two pieces.
  std::vector<double> first(2, 0.0), diag(2, 0.0);
  for (int t = 0; t < 2; ++t) {
    const WickContext ctx = WickContext::make(d.variance[t], d.M);
    for (std::size_t j = 0; j < 2; ++j) {
      first[j] = std::max(first[j], sup_sobolev_norm(project(d.psi[t][j], d.M), -0.1));
      diag[j] = std::max(diag[j], sup_sobolev_norm(wick_square(d.psi[t][j], ctx), -0.1));
    }
  }
  CHECK(z.first == doctest::Approx(std::sqrt((first[0] * first[0] + first[1] * first[1]) / 2)).epsilon(1e-14));
  CHECK(z.second_diag == doctest::Approx(std::sqrt((diag[0] * diag[0] + diag[1] * diag[1]) / 2)).epsilon(1e-14));

  // Ψ → λΨ with variance λ²c scales the k-th order piece by λ^k.
  const double lambda = 1.7;
  EnhancedData s = d;
  for (auto& node : s.psi) {
    for (auto& f : node) f *= lambda;
  }
  for (double& c : s.variance) c *= lambda * lambda;
  const ZnNorm zs = zn_norm(s, 0.1);
  CHECK(zs.first == doctest::Approx(lambda * z.first).epsilon(1e-12));
  CHECK(zs.second_diag == doctest::Approx(lambda * lambda * z.second_diag).epsilon(1e-12));
  CHECK(zs.second == doctest::Approx(lambda * lambda * z.second).epsilon(1e-12));
  CHECK(zs.third == doctest::Approx(std::pow(lambda, 3) * z.third).epsilon(1e-12));
}

TEST_CASE("averaged Wick powers") {
  LlnConfig cfg = small_lln();
  for (std::uint64_t r = 0; r < 3; ++r) {
    CHECK(lln_sample(LlnKind::wick_triple_avg, 1, cfg, r) == lln_sample(LlnKind::wick_triple_avg_an, 1, cfg, r));
  }
  CHECK(lln_sample(LlnKind::wick_square_avg, 3, cfg, 0) == lln_sample(LlnKind::wick_square_avg, 3, cfg, 0));
  CHECK_THROWS_AS(lln_sample(LlnKind::wick_square_avg, 0, cfg, 0), std::invalid_argument);

  LlnConfig still = cfg;
  still.T = 0.0;
  CHECK(lln_sample(LlnKind::wick_square_avg, 2, still, 0) == 0.0);

  // Small N is far from Gaussian, so compare the 1/√N decay between larger ensembles.
  const auto rows = lln_estimator(LlnKind::wick_square_avg, {16, 64}, cfg);
  REQUIRE(rows.size() == 2);
  const double ratio = rows[0].mean_norm / rows[1].mean_norm;
  MESSAGE("N = 16 to 64 norm ratio " << ratio);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));

  cfg.reps = 64;
  const auto more = lln_estimator(LlnKind::wick_square_avg, {4}, cfg);
  cfg.reps = 16;
  const auto fewer = lln_estimator(LlnKind::wick_square_avg, {4}, cfg);
  MESSAGE("SE with 16 reps " << fewer[0].se << ", with 64 reps " << more[0].se);
  CHECK(fewer[0].se / more[0].se == doctest::Approx(2.0).epsilon(0.4));
  CHECK_THROWS_AS(lln_estimator(LlnKind::wick_square_avg, {}, cfg), std::invalid_argument);
}

TEST_CASE("commutator vanishes when the I-operator acts trivially") {
  const GridSpec g = GridSpec::make(32, 1.0);
  const SpectralField f = testing::random_field(g, 3.0, 1.0, 1);
  const SpectralField h = testing::random_field(g, 3.0, 1.0, 2);
  CHECK(commutator_value(SpectralField(g), h, 0.8, 4.0) == 0.0);
  CHECK(commutator_value(f, h, 0.8, 9.5) <= 1e-14);
  CHECK(commutator_value(f, h, 0.8, 2.0) > 1e-6);

  CommutatorConfig cfg;
  cfg.n_grid = 64;
  cfg.band = 8;
  const SpectralField t = commutator_trial_field(cfg, 0.8, 4.0, 5);
  CHECK(sobolev_norm(apply_i_operator(t, 0.8, 4.0), 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  cfg.band = 11;
  CHECK_THROWS_AS(commutator_trial_field(cfg, 0.8, 4.0, 5), std::invalid_argument);
}

TEST_CASE("difference norms") {
  const GridSpec g = GridSpec::make(16, 1.0);
  std::vector<ComponentEnsemble> a, b, c;
  for (std::uint64_t t = 0; t < 3; ++t) {
    a.push_back(random_ensemble(g, 2, 1.0, 100 + t));
    b.push_back(random_ensemble(g, 2, 1.0, 200 + t));
    c.push_back(random_ensemble(g, 2, 1.0, 300 + t));
  }
  CHECK(difference_norms(a, a, 0.9, 0).c_t_norm == 0.0);

  auto shifted = a;
  shifted[1][1].pos.at(0, 0) += 0.25;
  const DifferenceNorms d = difference_norms(shifted, a, 0.9, 1);
  CHECK(d.c_t_norm == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d.an_norm == doctest::Approx(0.25 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(difference_norms(shifted, a, 0.9, 0).c_t_norm == 0.0);

  for (std::size_t j = 0; j < 2; ++j) {
    const double ac = difference_norms(a, c, 0.9, j).c_t_norm;
    CHECK(ac <= difference_norms(a, b, 0.9, j).c_t_norm + difference_norms(b, c, 0.9, j).c_t_norm);
  }
  CHECK_THROWS_AS(difference_norms(a, {a[0]}, 0.9, 0), std::invalid_argument);
  CHECK_THROWS_AS(difference_norms(a, a, 0.9, 2), std::out_of_range);
}

TEST_CASE("power-law fit") {
  const std::vector<double> n{4, 16, 64, 256};
  std::vector<double> exact;
  for (double x : n) exact.push_back(3.0 * std::pow(x, -0.5));
  const RateFit f = fit_rate(n, exact);
  CHECK(std::abs(f.slope + 0.5) <= 1e-12);
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.slope_se <= 1e-12);
  CHECK(std::abs(fit_rate(n, std::vector<double>(4, 2.0)).slope) <= 1e-15);

  KeyedRng rng(77);
  int inside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> noisy;
    for (double e : exact) noisy.push_back(e * std::exp(0.05 * rng.normal()));
    const RateFit nf = fit_rate(n, noisy);
    if (std::abs(nf.slope + 0.5) <= 3 * nf.slope_se) ++inside;
  }
  MESSAGE(inside << " of 200 noisy fits within 3 SE");
  CHECK(inside >= 170);

  CHECK_THROWS_AS(fit_rate(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(n, std::vector<double>{1, 2, 0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(std::vector<double>(3, 2.0), std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("sample statistics") {
  const std::vector<double> x{1, 2, 3, 4};
  const MeanSe ms = mean_se(x);
  CHECK(ms.mean == 2.5);
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(sample_variance(x) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.0495).epsilon(0.01));
  CHECK(kolmogorov_tail(1.63) == doctest::Approx(0.0098).epsilon(0.02));

  const KsResult same = ks_two_sample(x, x);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{2.5, 4}).statistic ==
        doctest::Approx(2.0 / 3.0));
  std::vector<double> lo(50), hi(50);
  std::iota(lo.begin(), lo.end(), 0.0);
  std::iota(hi.begin(), hi.end(), 100.0);
  const KsResult apart = ks_two_sample(lo, hi);
  CHECK(apart.statistic == 1.0);
  CHECK(apart.p_value < 1e-10);
}

TEST_CASE("integrated autocorrelation time") {
  KeyedRng rng(5);
  std::vector<double> iid(100000), ar(100000);
  const double phi = 0.8;
  double y = 0.0;
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = rng.normal();
    y = phi * y + std::sqrt(1 - phi * phi) * rng.normal();
    ar[i] = y;
  }
  CHECK(integrated_autocorrelation_time(iid) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(integrated_autocorrelation_time(ar) == doctest::Approx((1 + phi) / (1 - phi)).epsilon(0.1));
}

TEST_CASE("results do not depend on the worker count") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);

  const LlnConfig cfg = small_lln();
  set_thread_count(1);
  CHECK(thread_count() == 1);
  const auto serial = lln_estimator(LlnKind::wick_triple_avg_an, {3}, cfg);
  set_thread_count(4);
  const auto threaded = lln_estimator(LlnKind::wick_triple_avg_an, {3}, cfg);
  set_thread_count(0);
  CHECK(serial[0].mean_norm == threaded[0].mean_norm);
  CHECK(serial[0].se == threaded[0].se);
}
