#include <doctest.h>

#include <cmath>
#include <vector>

#include "sigwave/rng.hpp"
#include "sigwave/stats.hpp"
#include "sigwave/wick.hpp"
#include "support.hpp"

using namespace sigwave;

namespace {

double at_origin(const SpectralField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i].real();
  return s;
}

bool mean_zero_4se(const std::vector<double>& x) {
  const MeanSe m = mean_se(x);
  return std::abs(m.mean) <= 4.0 * m.se;
}

// Ψ_M(t) from zero data after one exact step of length t.
SpectralField psi_sample(const StochasticTransition& tr, std::uint64_t seed, std::uint64_t j) {
  ConvolutionState s = ConvolutionState::zero(tr.spec(), NoiseStream{seed, j}, tr.cutoff());
  tr.advance(s);
  return s.state.pos;
}

}  // namespace

TEST_CASE("Hermite polynomials") {
  CHECK(hermite(2, 3.0, 1.0) == 8.0);
  CHECK(hermite(3, 2.0, 1.0) == 2.0);
  CHECK(hermite(0, 5.0, 2.0) == 1.0);
  CHECK(hermite(1, 5.0, 2.0) == 5.0);
  CHECK(hermite(4, 0.0, 1.5) == doctest::Approx(3 * 1.5 * 1.5).epsilon(1e-15));
  CHECK_THROWS_AS(hermite(5, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(WickContext::make(-0.1, 4.0), std::invalid_argument);
}

TEST_CASE("Hermite three-term recurrence") {
  KeyedRng rng(1);
  for (int t = 0; t < 200; ++t) {
    const double x = 3 * rng.normal(), c = 2 * rng.uniform();
    for (int k = 1; k <= 3; ++k) {
      const double lhs = hermite(k + 1, x, c);
      const double rhs = x * hermite(k, x, c) - k * c * hermite(k - 1, x, c);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
    }
  }
}

TEST_CASE("Hermite generating function to fifth order") {
  const double t = 1e-2;
  for (double x : {-1.7, 0.0, 0.4, 2.2}) {
    for (double c : {0.0, 0.5, 2.0}) {
      double series = 0.0, fact = 1.0;
      for (int k = 0; k <= 4; ++k) {
        if (k > 0) fact *= k;
        series += std::pow(t, k) / fact * hermite(k, x, c);
      }
      const double exact = std::exp(t * x - c * t * t / 2);
      CHECK(std::abs(series - exact) <= 5 * std::pow(t, 5) * (1 + std::pow(std::abs(x) + c, 5)));
    }
  }
}

TEST_CASE("Hermite homogeneity") {
  for (double lambda : {0.5, 2.0, -1.5}) {
    for (int k = 0; k <= 4; ++k) {
      const double x = 0.7, c = 1.3;
      CHECK(hermite(k, lambda * x, lambda * lambda * c) ==
            doctest::Approx(std::pow(lambda, k) * hermite(k, x, c)).epsilon(1e-13));
    }
  }
}

TEST_CASE("deterministic Wick identities") {
  const GridSpec g = GridSpec::make(8, 1.0);
  const double c = 0.8;
  const WickContext ctx = WickContext::make(c, 4.0);
  SpectralField root(g);
  root.at(0, 0) = std::sqrt(c);
  CHECK(testing::max_abs(wick_pair(root, root, ctx, true)) <= 1e-15);
  CHECK(testing::max_abs(wick_triple(SpectralField(g), SpectralField(g), ctx, true)) == 0.0);

  const SpectralField q = wick_quartic(SpectralField(g), ctx);
  CHECK(q.at(0, 0).real() == doctest::Approx(3 * c * c).epsilon(1e-15));
  SpectralField rest = q;
  rest.at(0, 0) = 0.0;
  CHECK(testing::max_abs(rest) <= 1e-15);

  const SpectralField u = testing::random_field(g, 3.0, 1.0, 5);
  const SpectralField v = testing::random_field(g, 3.0, 1.0, 6);
  for (const SpectralField& w : {wick_square(u, ctx), wick_cube(u, ctx), wick_pair(u, v, ctx, false),
                                 wick_triple(u, v, ctx, false), wick_triple(u, v, ctx, true)}) {
    CHECK(w.hermitian_defect() <= 1e-15);
  }
  // Same-component products ignore the first argument.
  CHECK(testing::max_diff(wick_triple(v, u, ctx, true), wick_cube(u, ctx)) == 0.0);
  CHECK(testing::max_diff(wick_pair(v, u, ctx, true), wick_square(u, ctx)) == 0.0);
}

TEST_CASE("Wick products see only P_M of their inputs") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const WickContext ctx = WickContext::make(0.3, 2.0);
  const SpectralField u = testing::random_field(g, kNoCutoff, 1.0, 8);
  CHECK(testing::max_diff(wick_square(u, ctx), wick_square(project(u, 2.0), ctx)) == 0.0);
  const WickContext full = WickContext::make(0.3, kNoCutoff);
  CHECK(testing::max_diff(wick_square(u, full), wick_square(project(u, 2.0), ctx)) > 0.0);
}

TEST_CASE("pointwise product matches the grid values") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const double c = 0.4;
  const WickContext ctx = WickContext::make(c, kNoCutoff);
  const SpectralField u = testing::random_field(g, 4.0, 1.0, 21);
  const SpectralField v = testing::random_field(g, 4.0, 1.0, 22);
  const RealGrid a = to_physical(u), b = to_physical(v);
  const RealGrid t = to_physical(wick_triple(u, v, ctx, false));
  const RealGrid q = to_physical(wick_quartic(u, ctx));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(t[i] == doctest::Approx((a[i] * a[i] - c) * b[i]).epsilon(1e-12));
    CHECK(q[i] == doctest::Approx(std::pow(a[i], 4) - 6 * c * a[i] * a[i] + 3 * c * c).epsilon(1e-12));
  }
}

TEST_CASE("Wick products of the convolution have mean zero") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const double M = 4.0, t = 1.0;
  const StochasticTransition tr(g, t, M);
  const WickContext ctx = WickContext::make(sigma_m(t, 1.0, M), M);
  std::vector<double> pair_same, pair_diff, triple_same, triple_diff;
  for (std::uint64_t d = 0; d < 4000; ++d) {
    const SpectralField a = psi_sample(tr, 100 + d, 0);
    const SpectralField b = psi_sample(tr, 100 + d, 1);
    pair_same.push_back(at_origin(wick_pair(a, a, ctx, true)));
    pair_diff.push_back(at_origin(wick_pair(a, b, ctx, false)));
    triple_same.push_back(at_origin(wick_triple(a, a, ctx, true)));
    triple_diff.push_back(at_origin(wick_triple(a, b, ctx, false)));
  }
  CHECK(mean_zero_4se(pair_same));
  CHECK(mean_zero_4se(pair_diff));
  CHECK(mean_zero_4se(triple_same));
  CHECK(mean_zero_4se(triple_diff));
}

TEST_CASE("Wick square of mu_1 at alpha_M has mean zero; independent copies are uncorrelated") {
  const GridSpec g = GridSpec::make(16, 1.0);
  const double M = 4.0;
  const WickContext ctx = WickContext::make(alpha_m(1.0, M), M);
  std::vector<double> w, cross;
  for (std::uint64_t d = 0; d < 10000; ++d) {
    const PairState a = sample_mu1_mu0_pair(g, M, NoiseStream{7, 2 * d});
    const PairState b = sample_mu1_mu0_pair(g, M, NoiseStream{7, 2 * d + 1});
    const double x = to_physical(wick_square(a.pos, ctx))[0];
    const double y = to_physical(wick_square(b.pos, ctx))[0];
    w.push_back(x);
    cross.push_back(x * y);
  }
  CHECK(mean_zero_4se(w));
  CHECK(mean_zero_4se(cross));
}
