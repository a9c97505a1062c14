#include <doctest.h>

#include <cmath>

#include "mfg/spectral_core.hpp"
#include "support.hpp"

using namespace mfg;
using testing_support::adaptive_simpson;

TEST_CASE("validate_spectrum: trace condition and ordering") {
  auto fail = SpectrumSpec::from_family(PowerFamily{1.0, 1.0}, 3, 0.5);
  auto r = validate_spectrum(fail);
  CHECK_FALSE(r.passed());
  REQUIRE(r.trace_condition.has_value());
  CHECK_FALSE(*r.trace_condition);

  auto laplace = SpectrumSpec::from_family(PowerFamily{1.0, 2.0}, 3, 0.25);
  CHECK(laplace.eigenvalues == std::vector<double>{-1.0, -4.0, -9.0});
  r = validate_spectrum(laplace);
  CHECK(r.passed());
  CHECK(*r.trace_condition);

  r = validate_spectrum(SpectrumSpec::from_list({-1.0, -0.5}));
  CHECK_FALSE(r.passed());

  CHECK_FALSE(validate_spectrum(SpectrumSpec::from_list({-1.0, 0.0})).passed());
  CHECK_FALSE(validate_spectrum(SpectrumSpec::from_list({})).passed());
  // A finite list cannot certify the trace condition, so it only warns.
  r = validate_spectrum(SpectrumSpec::from_list({-1.0, -2.0}));
  CHECK(r.passed());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("semigroup_factor values") {
  const auto s = SpectrumSpec::from_list({-1.0, -2.0});
  CHECK(semigroup_factor(s, 0, 0.0) == 1.0);
  CHECK(semigroup_factor(s, 0, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(semigroup_factor(s, 1, 0.5) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK_THROWS_AS(semigroup_factor(s, 0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(semigroup_factor(s, 2, 0.1), std::out_of_range);
}

TEST_CASE("covariance_qk values against quadrature") {
  const auto s = SpectrumSpec::from_list({-1.0});
  CHECK(covariance_qk(s, 0, 0.0) == 0.0);
  CHECK(covariance_qk(s, 0, std::log(2.0)) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(std::abs(covariance_qk(s, 0, 20.0) - 0.5) < 1e-8);
}

TEST_CASE("property: semigroup law, quadrature agreement, monotone and bounded q") {
  CounterStream rng(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = testing_support::random_spectrum(rng, 1 + rng.index(3));
    const std::size_t k = rng.index(spec.modes());
    const double a = rng.uniform(0.0, 3.0), b = rng.uniform(0.0, 3.0);
    const double lhs = semigroup_factor(spec, k, a + b);
    const double rhs = semigroup_factor(spec, k, a) * semigroup_factor(spec, k, b);
    CHECK(std::abs(lhs - rhs) <= 4e-16 * std::max(1.0, lhs));

    const double lam = spec.eigenvalue(k);
    const double q = covariance_qk(spec, k, a);
    const double oracle = adaptive_simpson([lam](double s) { return std::exp(2.0 * lam * s); }, 0.0, a, 1e-14);
    CHECK(std::abs(q - oracle) <= 1e-10 * std::max(oracle, 1e-300));

    const double alpha = 1.0 / (2.0 * std::abs(lam));
    CHECK(q <= alpha);
    CHECK(covariance_qk(spec, k, a + 0.01) >= q);
  }
}

TEST_CASE("alpha_beta") {
  auto s = SpectrumSpec::from_list({-2.0});
  auto ab = alpha_beta(s, 0, InitialLaw::dirac({0.0}));
  CHECK(ab.alpha == doctest::Approx(0.25));
  CHECK(ab.beta == 0.0);

  s = SpectrumSpec::from_list({-1.0});
  ab = alpha_beta(s, 0, InitialLaw::gaussian({0.0}, {0.3}));
  CHECK(ab.alpha == doctest::Approx(0.5));
  CHECK(ab.beta == doctest::Approx(0.3));

  ab = alpha_beta(s, 0, InitialLaw::dirac({2.0}));
  CHECK(ab.beta == doctest::Approx(4.0));
  CHECK(ab.beta_exact);
}

TEST_CASE("drift and smoothing factors") {
  const auto s = SpectrumSpec::from_list({-3.0});
  const double h = 0.2;
  const double oracle = adaptive_simpson([](double u) { return std::exp(-3.0 * u); }, 0.0, h, 1e-15);
  CHECK(drift_factor(s, 0, h) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(smoothing_weight(s, 0, 0.5) ==
        doctest::Approx(std::exp(-1.5) / std::sqrt(covariance_qk(s, 0, 0.5))).epsilon(1e-14));
  CHECK_THROWS_AS(smoothing_weight(s, 0, 0.0), std::invalid_argument);
}
