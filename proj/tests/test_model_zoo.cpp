#include <doctest.h>

#include <cmath>

#include "mfg/model_zoo.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

namespace {

/// sup over a polar grid of the ball |alpha| <= R of <alpha, p> - f1(|alpha|).
double grid_sup_H1(std::span<const double> p, double R, const ConvexProfile& f1) {
  double best = -1e300;
  const int radial = 4000, angular = p.size() == 1 ? 2 : 720;
  for (int i = 0; i <= radial; ++i) {
    const double s = R * i / radial;
    for (int a = 0; a < angular; ++a) {
      double dot;
      if (p.size() == 1) {
        dot = (a == 0 ? s : -s) * p[0];
      } else {
        const double th = 2.0 * M_PI * a / angular;
        dot = s * (std::cos(th) * p[0] + std::sin(th) * p[1]);
      }
      best = std::max(best, dot - f1.f(s));
    }
  }
  return best;
}

CouplingSpec tanh_product(double weight = 1.0) {
  return CouplingSpec::product([](std::span<const double> x) { return std::tanh(x[0]); }, 1.0, 1.0, weight);
}

}  // namespace

TEST_CASE("H1 closed forms on the quadratic profile") {
  const auto f1 = ConvexProfile::quadratic(1.0);
  const std::vector<double> zero{0.0, 0.0}, unit{0.6, 0.8}, far{3.0, 0.0};
  CHECK(eval_H1(zero, 1.0, f1) == 0.0);
  CHECK(eval_DH1(zero, 1.0, f1) == std::vector<double>{0.0, 0.0});
  CHECK(eval_H1(unit, 1.0, f1) == doctest::Approx(0.25).epsilon(1e-14));
  const auto d = eval_DH1(unit, 1.0, f1);
  CHECK(d[0] == doctest::Approx(0.3));
  CHECK(d[1] == doctest::Approx(0.4));
  CHECK(eval_H1(far, 1.0, f1) == doctest::Approx(2.0));
  CHECK(eval_DH1(far, 1.0, f1) == std::vector<double>{1.0, 0.0});
  CHECK(std::abs(grid_sup_H1(unit, 1.0, f1) - 0.25) < 1e-4);
  CHECK(std::abs(grid_sup_H1(far, 1.0, f1) - 2.0) < 1e-4);
  CHECK_THROWS_AS(ConvexProfile::quadratic(0.0), std::invalid_argument);
}

TEST_CASE("H1 matches the grid-sup oracle on random p in both regimes") {
  CounterStream rng(101);
  int below = 0, above = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(0.5, 2.0), R = rng.uniform(0.5, 1.5);
    const auto f1 = ConvexProfile::quadratic(a);
    const std::size_t n = 1 + rng.index(2);
    std::vector<double> p(n);
    for (double& c : p) c = rng.uniform(-2.0, 2.0) * 2.0 * a * R;
    (euclidean_norm(p) < f1.derivative(R) ? below : above)++;
    CHECK(std::abs(eval_H1(p, R, f1) - grid_sup_H1(p, R, f1)) < 1e-4);
  }
  CHECK(below > 10);
  CHECK(above > 10);
}

TEST_CASE("DH1 against finite differences, boundedness and Lipschitz ratio") {
  CounterStream rng(202);
  const auto f1 = ConvexProfile::quadratic(1.0);
  const double R = 1.0, step = 1e-5;
  double worst_lip = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const double r = euclidean_norm(p);
    const auto g = eval_DH1(p, R, f1);
    CHECK(euclidean_norm(g) <= R + 1e-14);
    if (std::abs(r - f1.derivative(R)) > 1e-2 && r > 1e-2) {
      for (std::size_t k = 0; k < 2; ++k) {
        auto hi = p, lo = p;
        hi[k] += step;
        lo[k] -= step;
        CHECK(std::abs(g[k] - (eval_H1(hi, R, f1) - eval_H1(lo, R, f1)) / (2.0 * step)) < 1e-3);
      }
    }
    std::vector<double> q{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const auto gq = eval_DH1(q, R, f1);
    const double dp = std::hypot(p[0] - q[0], p[1] - q[1]);
    worst_lip = std::max(worst_lip, std::hypot(g[0] - gq[0], g[1] - gq[1]) / dp);
  }
  CHECK(worst_lip <= f1.inverse_lipschitz + 1.0);
  // Continuity across the kink |p| = f1'(R).
  std::vector<double> in{2.0 - 1e-9, 0.0}, out{2.0 + 1e-9, 0.0};
  CHECK(std::abs(eval_H1(in, R, f1) - eval_H1(out, R, f1)) < 1e-8);
  CHECK(std::abs(eval_DH1(in, R, f1)[0] - eval_DH1(out, R, f1)[0]) < 1e-8);
}

TEST_CASE("coupling_value examples") {
  const auto one = CouplingSpec::product([](std::span<const double>) { return 1.0; }, 1.0, 0.0);
  const ParticleMeasure cloud(1, {-1.0, 0.3, 2.0});
  for (double x : {-2.0, 0.0, 5.0}) CHECK(coupling_value(one, std::vector<double>{x}, cloud) == 1.0);

  const auto f = tanh_product();
  CHECK(coupling_value(f, std::vector<double>{0.5}, ParticleMeasure::dirac(std::vector<double>{1.0}, 1)) ==
        doctest::Approx(std::tanh(0.5) * std::tanh(1.0)).epsilon(1e-14));
  CHECK(coupling_value(f, std::vector<double>{0.5}, ParticleMeasure::dirac(std::vector<double>{1.0}, 1)) ==
        doctest::Approx(0.35198).epsilon(1e-4));

  CouplingSpec c;
  c.kind = CouplingSpec::Kind::Convolution;
  c.ell = [](std::span<const double>, double r) { return r; };
  c.rho = [](std::span<const double> z) { return std::exp(-z[0] * z[0]); };
  c.nu = ParticleMeasure::dirac(std::vector<double>{0.0}, 1);
  const auto delta0 = ParticleMeasure::dirac(std::vector<double>{0.0}, 1);
  for (double x : {0.0, 0.4, -1.3})
    CHECK(coupling_value(c, std::vector<double>{x}, delta0) == doctest::Approx(std::exp(-x * x)).epsilon(1e-14));

  CouplingSpec empty_nu = c;
  empty_nu.nu = ParticleMeasure();
  CHECK_THROWS_AS(coupling_value(empty_nu, std::vector<double>{0.0}, delta0), std::invalid_argument);
  CHECK_THROWS_AS(coupling_value(f, std::vector<double>{0.0}, ParticleMeasure()), std::invalid_argument);
}

TEST_CASE("monotonicity_check: constant, F1 identity, sign flip") {
  const MeasurePairSampler sampler{1, 48};
  const auto constant = CouplingSpec::product([](std::span<const double>) { return 1.0; }, 1.0, 0.0);
  const auto rc = monotonicity_check(constant, sampler, 200, 5);
  CHECK(rc.passed);
  CHECK(std::abs(rc.min_pairing) < 1e-14);

  const auto r = monotonicity_check(tanh_product(), sampler, 1000, 5);
  CHECK(r.passed);
  REQUIRE(r.closed_form_deviation.has_value());
  CHECK(*r.closed_form_deviation < 1e-12);
  CHECK(r.min_pairing >= -1e-12);

  const auto neg = monotonicity_check(tanh_product(-1.0), sampler, 1000, 5);
  CHECK_FALSE(neg.passed);
  CHECK(neg.min_pairing < 0.0);
  CHECK(*neg.closed_form_deviation < 1e-12);

  const MeasurePairSampler two{2, 32};
  const auto f2 = shipped_model("monotone_2mode").coupling;
  const auto r2 = monotonicity_check(f2, two, 500, 6);
  CHECK(r2.passed);
  CHECK(*r2.closed_form_deviation < 1e-12);

  // The convolution coupling with l(z, r) = r is monotone: the pairing is a
  // nu-weighted sum of squares of rho * (mu1 - mu2).
  const auto conv = convolution_one_mode().coupling;
  const auto rv = monotonicity_check(conv, sampler, 300, 7);
  CHECK(rv.passed);
  CHECK_FALSE(rv.closed_form_deviation.has_value());
}

TEST_CASE("assumption_check on shipped and hand-built Hamiltonians") {
  for (const auto& name : shipped_model_names()) {
    const auto model = shipped_model(name);
    const auto rep = assumption_check(model.problem.hamiltonian, 300, 11);
    INFO(name);
    CHECK(rep.passed());
    CHECK(rep.worst_gradient_norm <= 1.0 + 0.3 + 1e-12);
  }
  const auto two = monotone_two_mode();
  CHECK(two.problem.hamiltonian.hp_bound == doctest::Approx(1.3));

  HamiltonianSpec quad;
  quad.name = "p.p";
  quad.modes = 1;
  quad.hp_bound = 1.0;
  quad.lipschitz = 1.0;
  quad.gradient_lipschitz = 2.0;
  quad.measure_dependent = false;
  quad.freeze = [](const ParticleMeasure&) {
    FrozenHamiltonian out;
    out.value = [](std::span<const double>, std::span<const double> p) { return p[0] * p[0]; };
    out.gradient_p = [](std::span<const double>, std::span<const double> p, std::span<double> g) { g[0] = 2.0 * p[0]; };
    return out;
  };
  const auto bad = assumption_check(quad, 200, 12);
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(bad.bound_ok);
  CHECK(bad.worst_gradient_norm > 1.0);
  CHECK(bad.worst_measure_ratio == 0.0);

  HamiltonianSpec free_h = separated_hamiltonian(1, capped_control_hamiltonian(1, 1.0, ConvexProfile::quadratic(1.0)),
                                                 MeasureCoupling::constant(0.0));
  const auto free_rep = assumption_check(free_h, 200, 13);
  CHECK(free_rep.passed());
  CHECK(free_rep.worst_measure_ratio == 0.0);
}

TEST_CASE("convolution coupling is Lipschitz in the measure with the declared constant") {
  const auto model = convolution_one_mode();
  const double C = coupling_measure_lipschitz(model.coupling);
  CounterStream rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(24), b(24);
    const double sa = rng.uniform(-2.0, 2.0), sb = rng.uniform(-2.0, 2.0);
    for (auto& v : a) v = sa + rng.normal();
    for (auto& v : b) v = sb + 0.5 * rng.normal();
    const ParticleMeasure mu(1, a), nu(1, b);
    const double d1 = wasserstein1(mu, nu);
    const std::vector<double> x{rng.uniform(-3.0, 3.0)};
    CHECK(std::abs(coupling_value(model.coupling, x, mu) - coupling_value(model.coupling, x, nu)) <= C * d1 + 1e-12);
    CHECK(std::abs(coupling_value(model.coupling, x, mu)) <= coupling_sup_bound(model.coupling) + 1e-12);
  }
}

TEST_CASE("declared bounds of F1 and F2 hold on spot checks") {
  CounterStream rng(404);
  for (const auto& c : {tanh_product(), shipped_model("monotone_2mode").coupling}) {
    const std::size_t n = c.kind == CouplingSpec::Kind::F1 ? 1 : 2;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> a(10 * n), b(10 * n), x(n);
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = 1.0 + rng.normal();
      for (auto& v : x) v = 3.0 * rng.normal();
      const ParticleMeasure mu(n, a), nu(n, b);
      CHECK(std::abs(coupling_value(c, x, mu)) <= coupling_sup_bound(c) + 1e-12);
      CHECK(std::abs(coupling_value(c, x, mu) - coupling_value(c, x, nu)) <=
            coupling_measure_lipschitz(c) * wasserstein1(mu, nu) + 1e-12);
    }
  }
}

TEST_CASE("shipped model registry") {
  for (const auto& name : shipped_model_names()) CHECK(shipped_model(name).problem.name == name);
  CHECK_FALSE(antimonotone_one_mode().declared_monotone);
  CHECK_THROWS_AS(shipped_model("nope"), std::invalid_argument);
}
