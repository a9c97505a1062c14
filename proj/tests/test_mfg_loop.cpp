#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mfg/mfg_loop.hpp"
#include "mfg/model_zoo.hpp"

using namespace mfg;

namespace {

SolverConfig small_config(double step = 0.02, std::size_t particles = 4000, std::uint64_t seed = 17) {
  SolverConfig cfg;
  cfg.step = step;
  cfg.particles = particles;
  cfg.seed = seed;
  return cfg;
}

/// H_p = 0 and no measure dependence anywhere.
MFGProblem flat_problem() {
  const auto g = MeasureCoupling::from_function("cos", [](std::span<const double> x) { return std::cos(x[0]); }, 1.0);
  return {"flat", SpectrumSpec::from_list({-1.0}), constant_hamiltonian(1, 0.3), g, InitialLaw::dirac({0.0}), 1.0};
}

/// Capped control with no coupling: measure free but with a genuine feedback drift.
MFGProblem decoupled_problem() {
  auto h = separated_hamiltonian(1, capped_control_hamiltonian(1, 1.0, ConvexProfile::quadratic(1.0)),
                                 MeasureCoupling::constant(0.0));
  h.measure_dependent = false;
  const auto g = MeasureCoupling::from_function(
      "tanh", [](std::span<const double> x) { return 1.5 * std::tanh(x[0] - 0.5); }, 1.5);
  return {"decoupled", SpectrumSpec::from_list({-1.0}), h, g, InitialLaw::dirac({0.0}), 1.0};
}

MeasurePath every_other(const MeasurePath& fine, std::size_t stride) {
  std::vector<double> t;
  std::vector<ParticleMeasure> m;
  for (std::size_t j = 0; j < fine.steps(); j += stride) {
    t.push_back(fine.times()[j]);
    m.push_back(fine.at(j));
  }
  return {t, m};
}

/// Ten admissible input paths: constant Gaussian clouds and OU flows from shifted starts.
std::vector<MeasurePath> input_paths(const MFGProblem& p, const SolverConfig& cfg) {
  std::vector<MeasurePath> out;
  const auto mesh = uniform_mesh(p.horizon, cfg.step);
  const std::size_t n = p.spectrum.modes();
  for (int i = 0; i < 5; ++i) {
    std::vector<double> mean(n, -1.0 + 0.5 * i), var(n, 0.05 + 0.1 * i);
    out.push_back(constant_path(mesh, InitialLaw::gaussian(mean, var).sample(cfg.particles, 1000 + i)));
  }
  for (int i = 0; i < 5; ++i) {
    std::vector<double> start(n, -2.0 + i);
    out.push_back(propagate(p.spectrum, DriftField::zero(n), InitialLaw::dirac(start),
                            {p.horizon, cfg.step, cfg.particles, static_cast<std::uint64_t>(2000 + i)}));
  }
  return out;
}

}  // namespace

TEST_CASE("moment_bounds: a_n = 3/n for a Dirac start, eigenvalues -n, |H_p| <= 1") {
  auto h = constant_hamiltonian(3, 0.0);
  h.hp_bound = 1.0;
  const MFGProblem p{"bounds", SpectrumSpec::from_list({-1.0, -2.0, -3.0}), h, MeasureCoupling::constant(0.0),
                     InitialLaw::dirac({0.0, 0.0, 0.0}), 1.0};
  const auto a = moment_bounds(p);
  REQUIRE(a.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(3.0 / static_cast<double>(k + 1)).epsilon(1e-14));

  // a_1 = 3: a cloud with variance 30 on mode 1 violates it.
  const auto bad = constant_path(uniform_mesh(1.0, 0.1), InitialLaw::gaussian({0.0, 0.0, 0.0}, {30.0, 0.1, 0.1}).sample(4000, 3));
  const auto audit = moment_bound_audit(p, bad, std::nullopt, false);
  CHECK_FALSE(audit.passed);
  CHECK_FALSE(audit.modes[0].slack_pass);
  CHECK(audit.modes[1].slack_pass);
  const auto rows = audit.rows();
  CHECK(std::any_of(rows.begin(), rows.end(), [](const AuditRow& r) { return !r.pass; }));
}

TEST_CASE("psi_map with H_p = 0 is the OU law and ignores its input") {
  const auto p = flat_problem();
  const auto cfg = small_config();
  const auto ou = propagate(p.spectrum, DriftField::zero(1), p.m0, cfg.fp(p.horizon, 5));
  for (const auto& input : input_paths(p, cfg)) {
    const auto psi = psi_map(p, input, cfg, 5);
    CHECK(path_sup_distance(psi.law, ou).value == 0.0);
  }
}

TEST_CASE("psi_map on a decoupled problem is a constant map") {
  const auto p = decoupled_problem();
  const auto cfg = small_config();
  const auto inputs = input_paths(p, cfg);
  const auto ref = psi_map(p, inputs.front(), cfg, 9);
  for (std::size_t i = 1; i < inputs.size(); ++i) CHECK(path_sup_distance(psi_map(p, inputs[i], cfg, 9).law, ref.law).value == 0.0);
  // Different seeds differ only by Monte Carlo noise.
  CHECK(path_sup_distance(psi_map(p, inputs[3], cfg, 10).law, ref.law).value < 0.05);
}

TEST_CASE("psi_map outputs respect the moment bounds and a uniform modulus on every shipped model") {
  for (const auto& name : shipped_model_names()) {
    const auto model = shipped_model(name);
    const auto& p = model.problem;
    const bool two = p.spectrum.modes() > 1;
    auto cfg = small_config(0.02, two ? 1500 : 3000);
    if (two) cfg.hjb.grid_points = 33;
    // Sliced distances dominate the cost in two modes; a few hundred pairs suffice for the fit.
    ModulusOptions mod;
    mod.max_pairs = two ? 150 : 2000;
    std::vector<double> moduli;
    for (const auto& input : input_paths(p, cfg)) {
      const auto psi = psi_map(p, input, cfg, 21);
      INFO(name);
      CHECK(moment_bound_audit(p, psi.law, std::nullopt, false).passed);
      moduli.push_back(path_modulus(psi.law, mod).fitted_constant);
    }
    const auto [lo, hi] = std::minmax_element(moduli.begin(), moduli.end());
    MESSAGE(name << ": modulus constants in [" << *lo << ", " << *hi << "]");
    CHECK(*hi <= 1.5 * *lo);
  }
}

TEST_CASE("fixed_point_iterate: trivial cases converge in one iteration") {
  for (const auto& p : {flat_problem(), decoupled_problem()}) {
    const auto sol = fixed_point_iterate(p, small_config());
    CHECK(sol.converged());
    CHECK(sol.history.size() == 1);
    REQUIRE(sol.certificate.has_value());
    CHECK(sol.certificate->passed);
  }
  const auto p = flat_problem();
  const auto cfg = small_config();
  const auto sol = fixed_point_iterate(p, cfg);
  const auto ou = propagate(p.spectrum, DriftField::zero(1), p.m0, cfg.fp(p.horizon, derive_seed(cfg.seed, kIterationStream, 0)));
  CHECK(path_sup_distance(sol.m, ou).value == 0.0);
}

TEST_CASE("fixed_point_iterate on the monotone one-mode model") {
  const auto model = monotone_one_mode();
  const auto& p = model.problem;
  const auto sol = fixed_point_iterate(p, small_config(0.01, 10000, 20240611));
  CHECK(sol.converged());
  CHECK(sol.history.size() <= 50);
  CHECK(sol.history.back().rho_inf_change < 1e-2);
  REQUIRE(sol.certificate.has_value());
  CHECK(sol.certificate->passed);
  for (const auto& rec : sol.history) CHECK(rec.audit_pass);
  CHECK(moment_bound_audit(p, sol.m, sol.c_hat).passed);

  // Undamped Picard on a halved step with doubled particles.
  FixedPointOptions quiet;
  quiet.certify = false;
  quiet.audit_iterates = false;
  auto fine = small_config(0.005, 80000, 99);
  fine.damping = 1.0;
  fine.damping_min = 1.0;
  fine.fixed_point_tol = 5e-3;
  const auto oracle = fixed_point_iterate(p, fine, quiet);
  REQUIRE(oracle.converged());
  const auto reference = every_other(oracle.m, 2);

  const double d = path_sup_distance(reference, sol.m).value;
  MESSAGE("damped run vs refined undamped run: rho_inf = " << d);
  CHECK(d < 2e-2);
}

TEST_CASE("fixed_point_iterate reports on the anti-monotone control without raising") {
  const auto model = antimonotone_one_mode();
  auto cfg = small_config(0.02, 3000);
  cfg.fixed_point_max = 8;
  const auto sol = fixed_point_iterate(model.problem, cfg);
  CHECK(sol.history.size() >= 1);
  CHECK(sol.history.size() <= 8);
  for (const auto& rec : sol.history) CHECK(std::isfinite(rec.rho_inf_change));
  MESSAGE("anti-monotone: " << sol.history.size() << " iterations, converged = " << sol.converged());
  CHECK(sol.certificate.has_value() == sol.converged());
}

TEST_CASE("uniqueness_experiment: identical starts and seeds give distance zero") {
  const auto model = monotone_one_mode();
  auto cfg = small_config(0.02, 3000);
  const auto start = initial_guess(model.problem, cfg);
  const auto r = uniqueness_experiment(model.problem, start, start, cfg, 5, 5);
  CHECK(r.path_distance == 0.0);
  CHECK(r.value_distance == 0.0);
  CHECK(r.iterations_a == r.iterations_b);
}

TEST_CASE("fixed-point configuration validation") {
  const auto p = flat_problem();
  auto cfg = small_config();
  cfg.damping = 1.5;
  CHECK_THROWS_AS(fixed_point_iterate(p, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.certificate_tol = 0.0;
  CHECK_THROWS_AS(fixed_point_iterate(p, cfg), std::invalid_argument);
  cfg = small_config();
  FixedPointOptions opt;
  opt.start = constant_path(uniform_mesh(1.0, 0.1), ParticleMeasure::dirac(std::vector<double>{0.0}, 10));
  CHECK_THROWS_AS(fixed_point_iterate(p, cfg, opt), std::invalid_argument);
}
