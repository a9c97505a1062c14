#include <doctest.h>

#include <cmath>

#include "mfg/fp_particles.hpp"
#include "mfg/hjb_mild.hpp"
#include "mfg/mfg_loop.hpp"
#include "mfg/model_zoo.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

/// Max over interior nodes (central half of the box) and slices of |v - exact|.
template <class Exact>
double interior_error(const GridValueField& v, Exact exact) {
  double err = 0.0;
  const double L = v.grid.half_width();
  for (std::size_t j = 0; j < v.slices(); ++j)
    for (std::size_t g = 0; g < v.grid.size(); ++g) {
      const auto x = v.grid.node(g);
      if (std::any_of(x.begin(), x.end(), [L](double c) { return std::abs(c) > 0.5 * L; })) continue;
      err = std::max(err, std::abs(v.values[j][g] - exact(v.times[j], x)));
    }
  return err;
}

MeasurePath ou_path(const MFGProblem& p, double step, std::size_t particles, std::uint64_t seed) {
  return propagate(p.spectrum, DriftField::zero(p.spectrum.modes()), p.m0, {p.horizon, step, particles, seed});
}

const ScalarFn kConstOne = [](std::span<const double>) { return 1.0; };

}  // namespace

TEST_CASE("Kolmogorov: invariants of constants and the unit source") {
  const auto spec = SpectrumSpec::from_list({-1.0});
  const auto times = uniform_mesh(1.0, 0.02);
  const ScalarFn c = [](std::span<const double>) { return 2.5; };
  const TimeScalarFn zero = [](double, std::span<const double>) { return 0.0; };
  const TimeScalarFn one = [](double, std::span<const double>) { return 1.0; };
  auto u = solve_kolmogorov(spec, zero, c, times, 4.0);
  CHECK(interior_error(u, [](double, const std::vector<double>&) { return 2.5; }) < 1e-12);
  const ScalarFn nothing = [](std::span<const double>) { return 0.0; };
  u = solve_kolmogorov(spec, one, nothing, times, 4.0);
  CHECK(interior_error(u, [](double t, const std::vector<double>&) { return -(1.0 - t); }) < 1e-12);
  // d_t u + L0 u - f = 1 + 0 - 1 = 0 for u = -(T - t); Du vanishes.
  for (const auto& g : u.gradients)
    for (double d : g) CHECK(std::abs(d) < 1e-12);
}

TEST_CASE("Kolmogorov: Gaussian characteristic-function oracle") {
  const auto spec = SpectrumSpec::from_list({-1.0});
  const auto times = uniform_mesh(1.0, 0.01);
  const ScalarFn phi = [](std::span<const double> x) { return std::cos(x[0]); };
  const TimeScalarFn zero = [](double, std::span<const double>) { return 0.0; };
  const auto u = solve_kolmogorov(spec, zero, phi, times, 6.0);
  const double err = interior_error(u, [&](double t, const std::vector<double>& x) {
    const double s = 1.0 - t;
    return std::exp(-covariance_qk(spec, 0, s) / 2.0) * std::cos(std::exp(-s) * x[0]);
  });
  CHECK(err < 1e-4);

  // Monte Carlo check of the same oracle at one point.
  const double s = 0.7, x0 = 0.9;
  double acc = 0.0;
  const std::size_t draws = 400000;
  for (std::size_t i = 0; i < draws; ++i)
    acc += std::cos(std::exp(-s) * x0 + std::sqrt(covariance_qk(spec, 0, s)) * counter_normal(7, i, 0, 0));
  const double closed = std::exp(-covariance_qk(spec, 0, s) / 2.0) * std::cos(std::exp(-s) * x0);
  CHECK(std::abs(acc / draws - closed) < 3.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("HJB examples with trivial Hamiltonians") {
  const auto spec = SpectrumSpec::from_list({-1.0});
  const auto m = constant_path(uniform_mesh(1.0, 0.02), ParticleMeasure::dirac(std::vector<double>{0.0}, 4));
  const auto g = MeasureCoupling::from_function("cos", [](std::span<const double> x) { return std::cos(x[0]); }, 1.0);
  const auto res = solve_hjb_mild(spec, constant_hamiltonian(1, 0.0), g, m, 6.0);
  CHECK(res.diagnostics.sweeps == 1);
  CHECK(res.diagnostics.converged);
  const TimeScalarFn zero = [](double, std::span<const double>) { return 0.0; };
  const auto k = solve_kolmogorov(spec, zero, [](std::span<const double> x) { return std::cos(x[0]); }, m.times(), 6.0);
  CHECK(value_sup_distance(res.field, k) < 1e-14);

  const auto c = MeasureCoupling::constant(1.5);
  const double h0 = 0.7;
  const auto lin = solve_hjb_mild(spec, constant_hamiltonian(1, h0), c, m, 6.0);
  CHECK(interior_error(lin.field, [&](double t, const std::vector<double>&) { return 1.5 - h0 * (1.0 - t); }) < 1e-12);

  // H = 0: the residual measures nothing but quadrature error.
  const auto samples = interior_samples(res.field, 5, 1);
  CHECK(hjb_residual(spec, res.field, constant_hamiltonian(1, 0.0), g, m, samples) < 1e-6);
}

TEST_CASE("HJB on the one-mode capped model") {
  const auto model = monotone_one_mode();
  const auto& p = model.problem;
  const auto m = ou_path(p, 0.01, 4000, 3);
  const double L = problem_half_width(p, HjbConfig{});
  HjbConfig cfg;
  cfg.picard_tol = 1e-4;
  const auto coarse = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, m, L, cfg);
  CHECK(coarse.diagnostics.converged);
  CHECK(coarse.diagnostics.fitted_ratio < 1.0);

  const auto samples = interior_samples(coarse.field, 5, 1);
  const double r = hjb_residual(p.spectrum, coarse.field, p.hamiltonian, p.terminal, m, samples, cfg);
  CHECK(r < 5e-3);

  auto shifted = coarse.field;
  for (auto& slice : shifted.values)
    for (double& v : slice) v += 0.1;
  CHECK(hjb_residual(p.spectrum, shifted, p.hamiltonian, p.terminal, m, samples, cfg) >= 0.09);

  // Refined oracle: half spacing, half step, doubled quadrature nodes.
  const auto fine_m = ou_path(p, 0.005, 4000, 3);
  HjbConfig fine_cfg = cfg;
  fine_cfg.grid_points = 2 * cfg.grid_points - 1;
  fine_cfg.quadrature_nodes = 2 * cfg.quadrature_nodes;
  fine_cfg.tau_steps = 2 * cfg.tau_steps;
  fine_cfg.picard_tol = 1e-6;
  const auto fine = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, fine_m, L, fine_cfg);
  double err = 0.0;
  for (std::size_t j = 0; j < coarse.field.slices(); ++j)
    for (std::size_t g = 0; g < coarse.field.grid.size(); ++g) {
      const auto x = coarse.field.grid.node(g);
      if (std::abs(x[0]) > 0.5 * L) continue;
      err = std::max(err, std::abs(coarse.field.values[j][g] - fine.field.values[2 * j][2 * g]));
    }
  MESSAGE("coarse vs refined sup error: " << err);
  CHECK(err < 1e-2);
}

TEST_CASE("HJB invariants: contraction on shipped models, sup bound, gradient consistency") {
  for (const auto& name : shipped_model_names()) {
    const auto model = shipped_model(name);
    const auto& p = model.problem;
    const auto m = ou_path(p, 0.02, 2000, 5);
    HjbConfig cfg;
    if (p.spectrum.modes() > 1) cfg.grid_points = 40;
    const auto res = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, m, problem_half_width(p, cfg), cfg);
    INFO(name);
    CHECK(res.diagnostics.converged);
    CHECK(res.diagnostics.fitted_ratio < 1.0);

    // |v(t)| <= |G|_inf + (T - t) sup |H(., Dv, .)|.
    const auto frozen = freeze_along(p.hamiltonian, m);
    const auto g = p.terminal.freeze(m.at(m.steps() - 1));
    const std::size_t n = p.spectrum.modes();
    double g_sup = 0.0, h_sup = 0.0;
    std::vector<double> pv(n);
    for (std::size_t node = 0; node < res.field.grid.size(); ++node) {
      const auto x = res.field.grid.node(node);
      g_sup = std::max(g_sup, std::abs(g(x)));
      for (std::size_t j = 0; j < m.steps(); ++j) {
        const auto& grad = res.field.gradients[res.field.gradient_slice(j)];
        std::copy(grad.begin() + node * n, grad.begin() + (node + 1) * n, pv.begin());
        h_sup = std::max(h_sup, std::abs(frozen[j].value(x, pv)));
      }
    }
    for (std::size_t j = 0; j < res.field.slices(); ++j)
      for (double v : res.field.values[j])
        CHECK(std::abs(v) <= g_sup + (p.horizon - res.field.times[j]) * h_sup + 1e-9);
  }

  // Dv against the fourth-order central difference of v at interior nodes with t <= T - 0.05;
  // the three-point stencil's dx^2 truncation is itself near 1e-2 at the default spacing.
  const auto model = monotone_one_mode();
  const auto& p = model.problem;
  const auto m = ou_path(p, 0.01, 2000, 5);
  const auto res = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, m, problem_half_width(p, {}));
  const auto& grid = res.field.grid;
  const double dx = grid.spacing(0);
  double worst = 0.0;
  for (std::size_t j = 0; j < res.field.slices(); ++j) {
    if (res.field.times[j] > p.horizon - 0.05 + 1e-12) continue;
    const auto& v = res.field.values[j];
    for (std::size_t gi = 2; gi + 2 < grid.size(); ++gi) {
      if (std::abs(grid.node(gi)[0]) > 0.5 * grid.half_width()) continue;
      const double fd = (8.0 * (v[gi + 1] - v[gi - 1]) - (v[gi + 2] - v[gi - 2])) / (12.0 * dx);
      const double dv = res.field.gradients[j][gi];
      if (std::abs(fd) > 1e-2) worst = std::max(worst, std::abs(dv - fd) / std::abs(fd));
    }
  }
  MESSAGE("Dv vs finite differences, worst relative error: " << worst);
  CHECK(worst < 1e-2);
}

TEST_CASE("HJB data continuity in the measure path") {
  const auto model = monotone_one_mode();
  const auto& p = model.problem;
  const auto base = ou_path(p, 0.02, 2000, 9);
  const double L = problem_half_width(p, {});
  const double ref = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, base, L).field.weighted_gradient_norm();
  std::vector<double> eps{0.1, 0.05, 0.025}, dn;
  for (double e : eps) {
    std::vector<ParticleMeasure> ms;
    for (const auto& mu : base.measures()) ms.push_back(translate(mu, std::vector<double>{e}));
    const MeasurePath shifted(base.times(), ms);
    CHECK(path_sup_distance(shifted, base).value == doctest::Approx(e).epsilon(1e-9));
    const double v = solve_hjb_mild(p.spectrum, p.hamiltonian, p.terminal, shifted, L).field.weighted_gradient_norm();
    dn.push_back(std::abs(v - ref));
  }
  // Least-squares slope through the origin and its R^2.
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sxy += eps[i] * dn[i];
    sxx += eps[i] * eps[i];
    syy += dn[i] * dn[i];
  }
  const double K = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) ss_res += (dn[i] - K * eps[i]) * (dn[i] - K * eps[i]);
  const double r2 = 1.0 - ss_res / syy;
  MESSAGE("continuity constant K = " << K << ", R^2 = " << r2);
  CHECK(std::isfinite(K));
  CHECK(r2 > 0.9);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(dn[i] <= 1.5 * K * eps[i] + 1e-12);
}

TEST_CASE("HJB argument validation and artifacts") {
  const auto spec = SpectrumSpec::from_list({-1.0});
  HjbConfig bad;
  bad.picard_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  const TimeScalarFn zero = [](double, std::span<const double>) { return 0.0; };
  CHECK_THROWS_AS(solve_kolmogorov(spec, zero, kConstOne, uniform_mesh(1.0, 0.1), 0.0), std::invalid_argument);

  const auto u = solve_kolmogorov(spec, zero, kConstOne, uniform_mesh(1.0, 0.25), 3.0, HjbConfig{.grid_points = 8});
  const auto dir = testing_support::scratch_dir("value_field");
  write_value_field_dir(dir, u, {{"note", "unit"}});
  CHECK(std::filesystem::exists(dir / "metadata.csv"));
  const auto first = csv::read_lines(dir / "slice_0000.csv");
  CHECK(first.front() == "mode_1,value,grad_1");
  CHECK(first.size() == 9);
  CHECK(csv::read_lines(dir / "slice_0004.csv").front() == "mode_1,value");
}
