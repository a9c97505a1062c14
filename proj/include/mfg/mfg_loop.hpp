#pragma once

// The fixed-point map Psi (HJB against m, then the particle flow of m0 under
// b = -H_p(x, Dv, m)), damped iteration by particle pooling, and the moment,
// membership and uniqueness audits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfg/fp_particles.hpp"
#include "mfg/hjb_mild.hpp"
#include "mfg/measure_kit.hpp"
#include "mfg/problem.hpp"

namespace mfg {

struct SolverConfig {
  HjbConfig hjb;
  double step = 0.01;
  std::size_t particles = 10000;
  double damping = 0.5;
  double damping_min = 1.0 / 16.0;
  double fixed_point_tol = 1e-2;
  double certificate_tol = 1e-2;
  std::size_t fixed_point_max = 50;
  std::size_t certificate_repeats = 4;
  DistanceOptions distance;
  std::uint64_t seed = 0;

  FpConfig fp(double horizon, std::uint64_t fp_seed) const { return {horizon, step, particles, fp_seed}; }

  void validate() const {
    hjb.validate();
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (particles == 0) throw std::invalid_argument("particles must be positive");
    if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("damping must lie in (0, 1]");
    if (!(damping_min > 0.0) || damping_min > damping) throw std::invalid_argument("damping_min must lie in (0, damping]");
    if (!(fixed_point_tol > 0.0)) throw std::invalid_argument("fixed_point_tol must be positive");
    if (!(certificate_tol > 0.0)) throw std::invalid_argument("certificate_tol must be positive");
    if (fixed_point_max == 0) throw std::invalid_argument("fixed_point_max must be >= 1");
  }
};

inline double problem_half_width(const MFGProblem& p, const HjbConfig& cfg) {
  return cfg.half_width > 0.0 ? cfg.half_width : default_half_width(p.spectrum, p.m0, cfg.box_scale);
}

/// b(t_j, x) = -H_p(x, Dv(t_j, x), m(t_j)); the horizon reuses slice J-1.
inline DriftField assemble_drift(const GridValueField& v, const std::vector<FrozenHamiltonian>& frozen, double bound) {
  const std::size_t n = v.modes();
  auto field = std::make_shared<const GridValueField>(v);
  auto ham = std::make_shared<const std::vector<FrozenHamiltonian>>(frozen);
  return {"optimal_feedback", n, bound,
          [field, ham, n](double, std::size_t step, std::span<const double> x, std::span<double> out) {
            double p[kMaxTensorModes];
            field->gradient_at(step, x, std::span<double>(p, n));
            (*ham)[std::min(step, ham->size() - 1)].gradient_p(x, std::span<const double>(p, n), out);
            for (std::size_t k = 0; k < n; ++k) out[k] = -out[k];
          }};
}

struct PsiResult {
  MeasurePath law;
  HjbResult hjb;
};

/// Psi(m): solve HJB against m, then propagate m0 with the feedback drift.
inline PsiResult psi_map(const MFGProblem& problem, const MeasurePath& m, const SolverConfig& cfg,
                         std::uint64_t fp_seed) {
  const auto frozen = freeze_along(problem.hamiltonian, m);
  PsiResult out;
  out.hjb = solve_hjb_frozen(problem.spectrum, frozen, problem.terminal.freeze(m.at(m.steps() - 1)), m.times(),
                             problem_half_width(problem, cfg.hjb), cfg.hjb);
  const auto drift = assemble_drift(out.hjb.field, frozen, problem.hamiltonian.hp_bound);
  out.law = propagate(problem.spectrum, drift, problem.m0, cfg.fp(problem.horizon, fp_seed));
  return out;
}

/// Constant path at a sample of m0 (the delta-0 start when m0 is a Dirac).
inline MeasurePath initial_guess(const MFGProblem& problem, const SolverConfig& cfg) {
  return constant_path(uniform_mesh(problem.horizon, cfg.step),
                       problem.m0.sample(cfg.particles, derive_seed(cfg.seed, kInitialStream)));
}

/// Constant path at a sample of the invariant law N(0, diag(alpha_k)).
inline MeasurePath stationary_guess(const MFGProblem& problem, const SolverConfig& cfg) {
  std::vector<double> mean(problem.spectrum.modes(), 0.0), var;
  for (std::size_t k = 0; k < problem.spectrum.modes(); ++k)
    var.push_back(1.0 / (2.0 * std::abs(problem.spectrum.eigenvalue(k))));
  const auto law = InitialLaw::gaussian(mean, var);
  return constant_path(uniform_mesh(problem.horizon, cfg.step),
                       law.sample(cfg.particles, derive_seed(cfg.seed, kSamplerStream)));
}

// ------------------------------------------------------------------ audits

/// a_n = 3 (beta_n + alpha_n + alpha_n |H_p|_inf^2).
inline std::vector<double> moment_bounds(const MFGProblem& problem) {
  const double r2 = problem.hamiltonian.hp_bound * problem.hamiltonian.hp_bound;
  std::vector<double> a;
  for (std::size_t k = 0; k < problem.spectrum.modes(); ++k) {
    const auto ab = alpha_beta(problem.spectrum, k, problem.m0);
    a.push_back(3.0 * (ab.beta + ab.alpha + ab.alpha * r2));
  }
  return a;
}

/// 1.5 x the largest fourth norm moment over the zero drift and the
/// saturated constant drifts +-|H_p|_inf e_k.
inline double calibrate_c_hat(const MFGProblem& problem, const SolverConfig& cfg) {
  const std::size_t n = problem.spectrum.modes();
  std::vector<DriftField> drifts{DriftField::zero(n)};
  for (std::size_t k = 0; k < n; ++k)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> c(n, 0.0);
      c[k] = sgn * problem.hamiltonian.hp_bound;
      drifts.push_back(DriftField::constant(c));
    }
  double sup = 0.0;
  for (std::size_t d = 0; d < drifts.size(); ++d) {
    const auto path =
        propagate(problem.spectrum, drifts[d], problem.m0, cfg.fp(problem.horizon, derive_seed(cfg.seed, kSamplerStream, d)));
    for (const auto& mu : path.measures()) sup = std::max(sup, norm_fourth_moment(mu));
  }
  return 1.5 * sup;
}

struct AuditRow {
  std::string op;
  std::string mode;  // "1".."N", "all", or a tail index
  double bound = 0.0;
  double observed = 0.0;
  bool pass = true;
};

struct MomentAudit {
  std::vector<double> bounds;                // a_k, k = 1..N
  std::vector<BoundCheck> modes;             // sup over mesh times, per mode
  std::vector<std::size_t> argmax;           // mesh index of each sup
  std::optional<BoundCheck> fourth;          // against c_hat when supplied
  std::vector<std::pair<std::size_t, double>> tail_bounds;  // (n, a_n) for n > N, analytic only
  double modulus_constant = 0.0;
  bool passed = true;
  bool raw_passed = true;

  std::vector<AuditRow> rows() const {
    std::vector<AuditRow> out;
    for (std::size_t k = 0; k < modes.size(); ++k)
      out.push_back({"moment_bound_audit", std::to_string(k + 1), modes[k].bound, modes[k].observed,
                     modes[k].slack_pass});
    if (fourth) out.push_back({"moment_bound_audit.fourth", "all", fourth->bound, fourth->observed, fourth->slack_pass});
    for (const auto& [n, a] : tail_bounds)
      out.push_back({"moment_bound_audit.tail_declared", std::to_string(n), a, 0.0, true});  // not sampled
    out.push_back({"path_modulus.fitted_constant", "all", std::numeric_limits<double>::infinity(), modulus_constant,
                   std::isfinite(modulus_constant)});
    return out;
  }
};

/// Per-mode sup over the mesh of the second moments against a_k (3-stderr
/// slack), the fourth norm moment against c_hat, and the modulus fit.
inline MomentAudit moment_bound_audit(const MFGProblem& problem, const MeasurePath& m,
                                      std::optional<double> c_hat = std::nullopt, bool with_modulus = true) {
  MomentAudit audit;
  audit.bounds = moment_bounds(problem);
  const std::size_t n = problem.spectrum.modes();
  if (m.modes() != n) throw std::invalid_argument("moment_bound_audit: path has the wrong mode count");
  audit.modes.assign(n, BoundCheck{});
  audit.argmax.assign(n, 0);
  const double chat = c_hat.value_or(std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < m.steps(); ++j) {
    const auto rep = check_Qm0_membership(m.at(j), audit.bounds, chat);
    for (std::size_t k = 0; k < n; ++k) {
      if (j == 0 || rep.modes[k].observed > audit.modes[k].observed) {
        audit.modes[k] = rep.modes[k];
        audit.argmax[k] = j;
      }
      audit.passed = audit.passed && rep.modes[k].slack_pass;
      audit.raw_passed = audit.raw_passed && rep.modes[k].raw_pass;
    }
    if (c_hat) {
      if (!audit.fourth || rep.fourth.observed > audit.fourth->observed) audit.fourth = rep.fourth;
      audit.passed = audit.passed && rep.fourth.slack_pass;
      audit.raw_passed = audit.raw_passed && rep.fourth.raw_pass;
    }
  }
  if (problem.spectrum.family) {
    const double r2 = problem.hamiltonian.hp_bound * problem.hamiltonian.hp_bound;
    for (std::size_t extra = 1; extra <= 5; ++extra) {
      const std::size_t idx = n + extra;
      const double alpha = 1.0 / (2.0 * std::abs(problem.spectrum.family->eigenvalue(idx)));
      audit.tail_bounds.emplace_back(idx, 3.0 * alpha * (1.0 + r2));
    }
  }
  if (with_modulus && m.steps() >= 2) {
    ModulusOptions opt;
    opt.max_pairs = 2000;
    audit.modulus_constant = path_modulus(m, opt).fitted_constant;
  }
  return audit;
}

// ----------------------------------------------------------- fixed point

struct IterationRecord {
  std::size_t iteration = 0;
  double rho_inf_change = 0.0;  // rho_inf(m_{j+1}, m_j)
  double psi_residual = 0.0;    // rho_inf(Psi(m_j), m_j)
  double damping = 0.0;
  std::size_t hjb_sweeps = 0;
  bool audit_pass = true;
  double wallclock = 0.0;
};

struct Certificate {
  double value = 0.0;       // rho_inf(Psi(m*), m*) with a fresh seed
  double repeat_std = 0.0;  // sample std over repeat seeds
  double threshold = 0.0;   // tol + 3 repeat_std
  std::vector<double> repeats;
  bool passed = false;
};

enum class FixedPointStatus { Converged, MaxIterations };

struct MFGSolution {
  GridValueField v;
  HjbDiagnostics v_diagnostics;
  MeasurePath m;
  std::vector<IterationRecord> history;
  FixedPointStatus status = FixedPointStatus::MaxIterations;
  std::optional<Certificate> certificate;
  double c_hat = 0.0;

  bool converged() const { return status == FixedPointStatus::Converged; }
};

struct FixedPointOptions {
  std::optional<MeasurePath> start;
  bool certify = true;
  bool audit_iterates = true;
};

/// m_{j+1} = (1 - theta) m_j + theta Psi(m_j) realized by pooling; theta is
/// halved (down to damping_min) when the change grows twice in a row.
inline MFGSolution fixed_point_iterate(const MFGProblem& problem, const SolverConfig& cfg,
                                       const FixedPointOptions& opt = {}) {
  cfg.validate();
  const auto clock = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count(); };
  MFGSolution sol;
  MeasurePath m = opt.start ? *opt.start : initial_guess(problem, cfg);
  if (!same_mesh(m.times(), uniform_mesh(problem.horizon, cfg.step)))
    throw std::invalid_argument("fixed_point_iterate: start path is not on the solver mesh");
  if (opt.audit_iterates) sol.c_hat = calibrate_c_hat(problem, cfg);
  const bool decoupled = !problem.hamiltonian.measure_dependent && !problem.terminal.measure_dependent;
  double theta = cfg.damping;
  std::vector<double> changes;

  for (std::size_t it = 0; it < cfg.fixed_point_max; ++it) {
    auto psi = psi_map(problem, m, cfg, derive_seed(cfg.seed, kIterationStream, it));
    IterationRecord rec;
    rec.iteration = it + 1;
    rec.psi_residual = path_sup_distance(psi.law, m, cfg.distance).value;
    rec.hjb_sweeps = psi.hjb.diagnostics.sweeps;
    rec.damping = decoupled ? 1.0 : theta;
    // A decoupled Psi is a constant map, so its single output is the fixed point.
    MeasurePath next = decoupled ? psi.law : mix(m, psi.law, theta, derive_seed(cfg.seed, kShuffleStream, it));
    rec.rho_inf_change = path_sup_distance(next, m, cfg.distance).value;
    m = std::move(next);
    if (opt.audit_iterates) rec.audit_pass = moment_bound_audit(problem, m, sol.c_hat, false).passed;
    rec.wallclock = elapsed();
    sol.history.push_back(rec);
    changes.push_back(rec.rho_inf_change);
    if (decoupled || rec.rho_inf_change < cfg.fixed_point_tol) {
      sol.status = FixedPointStatus::Converged;
      break;
    }
    const std::size_t c = changes.size();
    if (c >= 3 && changes[c - 1] > changes[c - 2] && changes[c - 2] > changes[c - 3])
      theta = std::max(cfg.damping_min, 0.5 * theta);
  }

  const auto frozen = freeze_along(problem.hamiltonian, m);
  auto final_hjb = solve_hjb_frozen(problem.spectrum, frozen, problem.terminal.freeze(m.at(m.steps() - 1)), m.times(),
                                    problem_half_width(problem, cfg.hjb), cfg.hjb);
  sol.v = std::move(final_hjb.field);
  sol.v_diagnostics = std::move(final_hjb.diagnostics);

  if (opt.certify && sol.converged()) {
    Certificate cert;
    const auto drift = assemble_drift(sol.v, frozen, problem.hamiltonian.hp_bound);
    for (std::size_t r = 0; r < std::max<std::size_t>(cfg.certificate_repeats, 2); ++r) {
      const auto law = propagate(problem.spectrum, drift, problem.m0,
                                 cfg.fp(problem.horizon, derive_seed(cfg.seed, kIterationStream, 100000 + r)));
      cert.repeats.push_back(path_sup_distance(law, m, cfg.distance).value);
    }
    cert.value = cert.repeats.front();
    double mean = 0.0;
    for (double d : cert.repeats) mean += d;
    mean /= static_cast<double>(cert.repeats.size());
    double var = 0.0;
    for (double d : cert.repeats) var += (d - mean) * (d - mean);
    cert.repeat_std = std::sqrt(var / static_cast<double>(cert.repeats.size() - 1));
    cert.threshold = cfg.certificate_tol + 3.0 * cert.repeat_std;
    cert.passed = cert.value < cert.threshold;
    sol.certificate = cert;
  }
  sol.m = std::move(m);
  return sol;
}

struct UniquenessReport {
  double path_distance = 0.0;   // rho_inf between the converged paths
  double value_distance = 0.0;  // sup-grid distance between the value fields
  bool converged_a = false;
  bool converged_b = false;
  std::size_t iterations_a = 0;
  std::size_t iterations_b = 0;
};

inline UniquenessReport uniqueness_experiment(const MFGProblem& problem, const MeasurePath& start_a,
                                              const MeasurePath& start_b, const SolverConfig& cfg,
                                              std::uint64_t seed_a, std::uint64_t seed_b) {
  auto run = [&](const MeasurePath& start, std::uint64_t seed) {
    SolverConfig c = cfg;
    c.seed = seed;
    FixedPointOptions opt;
    opt.start = start;
    opt.certify = false;
    opt.audit_iterates = false;
    return fixed_point_iterate(problem, c, opt);
  };
  const auto a = run(start_a, seed_a);
  const auto b = run(start_b, seed_b);
  UniquenessReport r;
  r.path_distance = path_sup_distance(a.m, b.m, cfg.distance).value;
  r.value_distance = value_sup_distance(a.v, b.v);
  r.converged_a = a.converged();
  r.converged_b = b.converged();
  r.iterations_a = a.history.size();
  r.iterations_b = b.history.size();
  return r;
}

}  // namespace mfg
