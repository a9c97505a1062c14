#pragma once

// Mild HJB solver on a time mesh x tensor grid:
//   v(t) = R_{T-t} G - int_t^T R_{s-t} H(., Dv(s), m(s)) ds,
// with the gradient carried by the same formula through D R. The time
// integral substitutes s = t + tau^2, which removes the (s-t)^{-1/2} kernel
// singularity, and is integrated by the trapezoid rule in tau.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/csv.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/measure.hpp"
#include "mfg/measure_kit.hpp"
#include "mfg/ou_kernel.hpp"
#include "mfg/parallel.hpp"
#include "mfg/spectral_core.hpp"

namespace mfg {

struct HjbConfig {
  std::size_t grid_points = 64;      // per mode
  double box_scale = 6.0;            // L = box_scale * max_k sqrt(alpha_k + beta_k)
  double half_width = 0.0;           // explicit L; 0 derives it from box_scale
  std::size_t quadrature_nodes = 16;
  std::size_t tau_steps = 40;        // tau-trapezoid panels over the full horizon
  double picard_tol = 1e-6;
  std::size_t picard_max = 100;
  /// Largest grid.size() * nodes^N for which the terminal term is integrated
  /// on the exact callable G; above it G is sampled on the grid.
  std::size_t terminal_budget = 4'000'000;

  void validate() const {
    if (grid_points < 2) throw std::invalid_argument("hjb: grid_points must be >= 2");
    if (!(box_scale > 0.0)) throw std::invalid_argument("hjb: box_scale must be positive");
    if (half_width < 0.0) throw std::invalid_argument("hjb: half_width must be >= 0");
    if (quadrature_nodes == 0) throw std::invalid_argument("hjb: quadrature_nodes must be >= 1");
    if (tau_steps == 0) throw std::invalid_argument("hjb: tau_steps must be >= 1");
    if (!(picard_tol > 0.0)) throw std::invalid_argument("hjb: picard_tol must be positive");
    if (picard_max == 0) throw std::invalid_argument("hjb: picard_max must be >= 1");
  }
};

/// 6-sigma box of the invariant law shifted by m0: L = scale * max_k sqrt(alpha_k + beta_k).
inline double default_half_width(const SpectrumSpec& spec, const InitialLaw& m0, double scale) {
  double worst = 0.0;
  for (std::size_t k = 0; k < spec.modes(); ++k) {
    const auto ab = alpha_beta(spec, k, m0);
    worst = std::max(worst, std::sqrt(ab.alpha + ab.beta));
  }
  return scale * worst;
}

/// v on slices j = 0..J and Dv on slices j = 0..J-1 (the gradient is not
/// defined at the horizon; consumers at t_J read slice J-1).
struct GridValueField {
  TensorGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;     // [j][node]
  std::vector<std::vector<double>> gradients;  // [j][node * N + k], j < J
  double tail_mass = 0.0;

  std::size_t modes() const { return grid.modes(); }
  std::size_t slices() const { return times.size(); }
  double horizon() const { return times.back(); }

  std::size_t gradient_slice(std::size_t j) const { return std::min(j, gradients.size() - 1); }

  double value_at(std::size_t j, std::span<const double> x) const { return grid.interpolate(values.at(j), x); }

  void gradient_at(std::size_t j, std::span<const double> x, std::span<double> out) const {
    grid.interpolate_all(gradients[gradient_slice(j)], x, modes(), out);
  }

  double sup_norm() const {
    double s = 0.0;
    for (const auto& v : values)
      for (double x : v) s = std::max(s, std::abs(x));
    return s;
  }

  static double node_norm(const std::vector<double>& g, std::size_t node, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += g[node * n + k] * g[node * n + k];
    return std::sqrt(s);
  }

  /// sup_t (T - t)^{1/2} |Dv(t, .)|_inf over the grid.
  double weighted_gradient_norm() const {
    double s = 0.0;
    for (std::size_t j = 0; j < gradients.size(); ++j) {
      double sup = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) sup = std::max(sup, node_norm(gradients[j], g, modes()));
      s = std::max(s, std::sqrt(horizon() - times[j]) * sup);
    }
    return s;
  }
};

/// sup_t (T - t)^{1/2} |Da(t) - Db(t)|_grid.
inline double weighted_gradient_distance(const GridValueField& a, const GridValueField& b) {
  if (a.grid.size() != b.grid.size() || a.gradients.size() != b.gradients.size())
    throw std::invalid_argument("weighted_gradient_distance: fields have different shapes");
  const std::size_t n = a.modes();
  double s = 0.0;
  for (std::size_t j = 0; j < a.gradients.size(); ++j) {
    double sup = 0.0;
    for (std::size_t g = 0; g < a.grid.size(); ++g) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double e = a.gradients[j][g * n + k] - b.gradients[j][g * n + k];
        d += e * e;
      }
      sup = std::max(sup, std::sqrt(d));
    }
    s = std::max(s, std::sqrt(a.horizon() - a.times[j]) * sup);
  }
  return s;
}

/// sup over all slices and nodes of |va - vb|.
inline double value_sup_distance(const GridValueField& a, const GridValueField& b) {
  if (a.grid.size() != b.grid.size() || a.values.size() != b.values.size())
    throw std::invalid_argument("value_sup_distance: fields have different shapes");
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j)
    for (std::size_t g = 0; g < a.grid.size(); ++g) s = std::max(s, std::abs(a.values[j][g] - b.values[j][g]));
  return s;
}

struct HjbDiagnostics {
  std::vector<double> changes;  // weighted gradient change per Picard sweep
  double fitted_ratio = 0.0;    // geometric rate fitted to the tail of `changes`
  bool converged = false;
  std::size_t sweeps = 0;
  double tail_mass = 0.0;
  double seconds = 0.0;
};

struct HjbResult {
  GridValueField field;
  HjbDiagnostics diagnostics;
};

/// exp(slope) of a least-squares line through log(changes) over the tail.
inline double fitted_geometric_ratio(const std::vector<double>& changes) {
  std::vector<double> c;
  for (double v : changes)
    if (v > 0.0) c.push_back(v);
  if (c.size() < 2) return 0.0;
  const std::size_t use = std::max<std::size_t>(2, std::min(c.size(), std::max<std::size_t>(3, c.size() / 2)));
  const std::size_t start = c.size() - use;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < c.size(); ++i) {
    const double x = static_cast<double>(i), y = std::log(c[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(use);
  return std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

namespace detail {

/// Shared machinery for one mild-form evaluation on a fixed mesh and grid.
class MildOperator {
 public:
  MildOperator(const SpectrumSpec& spec, std::vector<double> times, TensorGrid grid, const HjbConfig& cfg)
      : spec_(spec), times_(std::move(times)), semigroup_(spec, grid, QuadratureRule(cfg.quadrature_nodes)),
        cfg_(cfg) {}

  const TensorGrid& grid() const { return semigroup_.grid(); }
  const std::vector<double>& times() const { return times_; }
  std::size_t last() const { return times_.size() - 1; }
  double horizon() const { return times_.back(); }

  /// Installs R_{T-t_j} G and D R_{T-t_j} G for every j < J.
  void install_terminal(const ScalarFn& g) {
    const auto& grid = semigroup_.grid();
    const std::size_t n = grid.modes();
    terminal_nodes_.assign(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
      std::vector<double> x(n);
      for (std::size_t i = b; i < e; ++i) {
        grid.node(i, x);
        terminal_nodes_[i] = g(x);
      }
    });
    terminal_value_.assign(last(), std::vector<double>(grid.size(), 0.0));
    terminal_grad_.assign(last(), std::vector<double>(grid.size() * n, 0.0));
    std::size_t work = grid.size();
    for (std::size_t k = 0; k < n; ++k) work *= semigroup_.rule().size();
    const bool exact = work <= cfg_.terminal_budget;
    parallel_for(
        last(),
        [&](std::size_t b, std::size_t e) {
          std::vector<double> x(n);
          for (std::size_t j = b; j < e; ++j) {
            const double sigma = horizon() - times_[j];
            if (exact) {
              for (std::size_t i = 0; i < grid.size(); ++i) {
                grid.node(i, x);
                const auto r = evaluate_Rt(spec_, semigroup_.rule(), g, sigma, x, true);
                terminal_value_[j][i] = r.value;
                for (std::size_t k = 0; k < n; ++k) terminal_grad_[j][i * n + k] = r.gradient[k];
              }
            } else {
              semigroup_.accumulate(semigroup_.kernels(sigma, true), terminal_nodes_, 1.0, terminal_value_[j],
                                    &terminal_grad_[j]);
            }
          }
        },
        1);
  }

  /// Evaluates the mild right-hand side for the nodal source slices h[0..J].
  void evaluate(const std::vector<std::vector<double>>& h, GridValueField& out) const {
    const auto& grid = semigroup_.grid();
    const std::size_t n = grid.modes();
    out.grid = grid;
    out.times = times_;
    out.values.assign(times_.size(), {});
    out.gradients.assign(last(), {});
    parallel_for(
        last(),
        [&](std::size_t b, std::size_t e) {
          std::vector<double> source(grid.size());
          for (std::size_t j = b; j < e; ++j) {
            std::vector<double> value = terminal_value_[j];
            std::vector<double> grad = terminal_grad_[j];
            const double span = horizon() - times_[j];
            const auto panels = static_cast<std::size_t>(
                std::max(1.0, std::ceil(static_cast<double>(cfg_.tau_steps) * std::sqrt(span / horizon()) - 1e-9)));
            const double dtau = std::sqrt(span) / static_cast<double>(panels);
            // tau = 0 contributes nothing: the integrand carries the factor 2 tau.
            for (std::size_t i = 1; i <= panels; ++i) {
              const double tau = dtau * static_cast<double>(i);
              const double sigma = i == panels ? span : tau * tau;
              const double s = times_[j] + sigma;
              interpolate_in_time(h, s, source);
              const double weight = (i == panels ? 0.5 : 1.0) * dtau * 2.0 * tau;
              semigroup_.accumulate(semigroup_.kernels(sigma, true), source, -weight, value, &grad);
            }
            out.values[j] = std::move(value);
            out.gradients[j] = std::move(grad);
          }
        },
        1);
    out.values[last()] = terminal_nodes_;
    out.tail_mass = semigroup_.interior_tail_mass(horizon());
    for (const auto& v : out.values)
      for (double x : v)
        if (!std::isfinite(x)) throw std::runtime_error("hjb: non-finite value produced");
    (void)n;
  }

  void interpolate_in_time(const std::vector<std::vector<double>>& h, double s, std::vector<double>& out) const {
    std::size_t a = 0;
    while (a + 1 < last() && times_[a + 1] <= s) ++a;
    const double w = std::clamp((s - times_[a]) / (times_[a + 1] - times_[a]), 0.0, 1.0);
    for (std::size_t g = 0; g < out.size(); ++g) out[g] = (1.0 - w) * h[a][g] + w * h[a + 1][g];
  }

 private:
  const SpectrumSpec& spec_;
  std::vector<double> times_;
  GridSemigroup semigroup_;
  HjbConfig cfg_;
  std::vector<double> terminal_nodes_;
  std::vector<std::vector<double>> terminal_value_;
  std::vector<std::vector<double>> terminal_grad_;
};

inline TensorGrid make_grid(const SpectrumSpec& spec, double half_width, const HjbConfig& cfg) {
  if (spec.modes() > kMaxTensorModes) throw std::invalid_argument("hjb: at most three modes are supported");
  if (!(half_width > 0.0)) throw std::invalid_argument("hjb: the spatial box has zero width");
  return TensorGrid::uniform(spec.modes(), cfg.grid_points, half_width);
}

}  // namespace detail

/// Time-dependent source f(t, x).
using TimeScalarFn = std::function<double(double, std::span<const double>)>;

/// Linear Kolmogorov problem d_t u + L0 u = f, u(T) = phi, in mild form
/// u(t) = R_{T-t} phi - int_t^T R_{s-t} f(s) ds.
inline GridValueField solve_kolmogorov(const SpectrumSpec& spec, const TimeScalarFn& f, const ScalarFn& phi,
                                       const std::vector<double>& times, double half_width,
                                       const HjbConfig& cfg = {}) {
  cfg.validate();
  require_valid(spec);
  detail::MildOperator op(spec, times, detail::make_grid(spec, half_width, cfg), cfg);
  op.install_terminal(phi);
  const auto& grid = op.grid();
  std::vector<std::vector<double>> source(times.size(), std::vector<double>(grid.size()));
  std::vector<double> x(spec.modes());
  for (std::size_t j = 0; j < times.size(); ++j)
    for (std::size_t g = 0; g < grid.size(); ++g) {
      grid.node(g, x);
      source[j][g] = f(times[j], x);
      if (!std::isfinite(source[j][g])) throw std::invalid_argument("solve_kolmogorov: source is not finite");
    }
  GridValueField out;
  op.evaluate(source, out);
  return out;
}

/// Frozen Hamiltonians along the path, one per mesh time.
inline std::vector<FrozenHamiltonian> freeze_along(const HamiltonianSpec& h, const MeasurePath& m) {
  std::vector<FrozenHamiltonian> out;
  out.reserve(m.steps());
  if (!h.measure_dependent) {
    auto frozen = h.freeze(m.at(0));
    out.assign(m.steps(), frozen);
    return out;
  }
  for (const auto& mu : m.measures()) out.push_back(h.freeze(mu));
  return out;
}

/// Picard iteration with the Hamiltonian already frozen on each mesh time and
/// the terminal coupling frozen at m(T).
inline HjbResult solve_hjb_frozen(const SpectrumSpec& spec, const std::vector<FrozenHamiltonian>& frozen,
                                  const ScalarFn& terminal, const std::vector<double>& times, double half_width,
                                  const HjbConfig& cfg = {}) {
  cfg.validate();
  require_valid(spec);
  if (times.size() < 2) throw std::invalid_argument("solve_hjb_mild: the mesh needs at least two points");
  if (frozen.size() != times.size()) throw std::invalid_argument("solve_hjb_mild: one Hamiltonian per mesh time");
  const auto start = std::chrono::steady_clock::now();
  detail::MildOperator op(spec, times, detail::make_grid(spec, half_width, cfg), cfg);
  op.install_terminal(terminal);
  const auto& grid = op.grid();
  const std::size_t n = spec.modes();
  const std::size_t J = times.size() - 1;

  HjbResult result;
  // v^(0) = R_{T-t} G: the mild map with a vanishing source.
  std::vector<std::vector<double>> source(J + 1, std::vector<double>(grid.size(), 0.0));
  op.evaluate(source, result.field);

  for (std::size_t sweep = 0; sweep < cfg.picard_max; ++sweep) {
    const auto& current = result.field;
    parallel_for(
        J + 1,
        [&](std::size_t b, std::size_t e) {
          std::vector<double> x(n), p(n);
          for (std::size_t j = b; j < e; ++j) {
            const auto& grad = current.gradients[current.gradient_slice(j)];
            for (std::size_t g = 0; g < grid.size(); ++g) {
              grid.node(g, x);
              std::copy(grad.begin() + static_cast<std::ptrdiff_t>(g * n),
                        grad.begin() + static_cast<std::ptrdiff_t>((g + 1) * n), p.begin());
              source[j][g] = frozen[j].value(x, p);
            }
          }
        },
        1);
    GridValueField next;
    op.evaluate(source, next);
    const double change = weighted_gradient_distance(next, result.field);
    result.field = std::move(next);
    result.diagnostics.changes.push_back(change);
    result.diagnostics.sweeps = sweep + 1;
    if (!std::isfinite(change)) throw std::runtime_error("solve_hjb_mild: Picard iteration produced NaN");
    if (change < cfg.picard_tol) {
      result.diagnostics.converged = true;
      break;
    }
  }
  result.diagnostics.fitted_ratio = fitted_geometric_ratio(result.diagnostics.changes);
  result.diagnostics.tail_mass = result.field.tail_mass;
  result.diagnostics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Picard iteration for the mild HJB equation against a frozen measure path.
inline HjbResult solve_hjb_mild(const SpectrumSpec& spec, const HamiltonianSpec& h, const MeasureCoupling& terminal,
                                const MeasurePath& m, double half_width, const HjbConfig& cfg = {}) {
  if (m.modes() != spec.modes()) throw std::invalid_argument("solve_hjb_mild: path has the wrong mode count");
  return solve_hjb_frozen(spec, freeze_along(h, m), terminal.freeze(m.at(m.steps() - 1)), m.times(), half_width,
                          cfg);
}

struct ResidualSample {
  std::size_t slice = 0;  // mesh index, must be < J
  std::vector<double> x;
};

/// Nodes in the central half of the box on every `time_stride`-th slice below T.
inline std::vector<ResidualSample> interior_samples(const GridValueField& v, std::size_t time_stride = 1,
                                                    std::size_t node_stride = 1) {
  std::vector<ResidualSample> out;
  const double L = v.grid.half_width();
  for (std::size_t j = 0; j + 1 < v.slices(); j += std::max<std::size_t>(time_stride, 1))
    for (std::size_t g = 0; g < v.grid.size(); g += std::max<std::size_t>(node_stride, 1)) {
      auto x = v.grid.node(g);
      if (std::all_of(x.begin(), x.end(), [L](double c) { return std::abs(c) <= 0.5 * L; }))
        out.push_back({j, std::move(x)});
    }
  return out;
}

/// max over samples of |v(t, x) - [R_{T-t} G - int_t^T R_{s-t} H(., Dv(s), m(s)) ds](x)|,
/// re-evaluated with twice the quadrature nodes and tau panels, H taken at the
/// quadrature images with interpolated Dv.
inline double hjb_residual(const SpectrumSpec& spec, const GridValueField& v, const HamiltonianSpec& h,
                           const MeasureCoupling& terminal, const MeasurePath& m,
                           const std::vector<ResidualSample>& samples, const HjbConfig& cfg = {}) {
  if (!same_mesh(v.times, m.times())) throw std::invalid_argument("hjb_residual: mesh mismatch");
  const QuadratureRule rule(2 * cfg.quadrature_nodes);
  const std::size_t tau_steps = 2 * cfg.tau_steps;
  const ScalarFn g = terminal.freeze(m.at(m.steps() - 1));
  const auto frozen = freeze_along(h, m);
  const std::size_t n = spec.modes();
  const std::size_t J = v.slices() - 1;
  const double T = v.horizon();
  std::vector<double> worst(samples.size(), 0.0);
  parallel_for(
      samples.size(),
      [&](std::size_t b, std::size_t e) {
        std::vector<double> p(n);
        for (std::size_t idx = b; idx < e; ++idx) {
          const auto& smp = samples[idx];
          if (smp.slice >= J) throw std::invalid_argument("hjb_residual: sample time must lie below T");
          const double t = v.times[smp.slice];
          double rhs = apply_Rt(spec, rule, g, T - t, smp.x);
          const double span = T - t;
          const auto panels = static_cast<std::size_t>(
              std::max(1.0, std::ceil(static_cast<double>(tau_steps) * std::sqrt(span / T) - 1e-9)));
          const double dtau = std::sqrt(span) / static_cast<double>(panels);
          for (std::size_t i = 1; i <= panels; ++i) {
            const double tau = dtau * static_cast<double>(i);
            const double sigma = i == panels ? span : tau * tau;
            const double s = t + sigma;
            std::size_t a = 0;
            while (a + 1 < J && v.times[a + 1] <= s) ++a;
            const double w = std::clamp((s - v.times[a]) / (v.times[a + 1] - v.times[a]), 0.0, 1.0);
            const ScalarFn hs = [&, a, w](std::span<const double> y) {
              double val = 0.0;
              if (w < 1.0) {
                v.gradient_at(a, y, p);
                val += (1.0 - w) * frozen[a].value(y, p);
              }
              if (w > 0.0) {
                v.gradient_at(a + 1, y, p);
                val += w * frozen[a + 1].value(y, p);
              }
              return val;
            };
            const double weight = (i == panels ? 0.5 : 1.0) * dtau * 2.0 * tau;
            rhs -= weight * apply_Rt(spec, rule, hs, sigma, smp.x);
          }
          worst[idx] = std::abs(v.value_at(smp.slice, smp.x) - rhs);
        }
      },
      8);
  double r = 0.0;
  for (double w : worst) r = std::max(r, w);
  return r;
}

/// One CSV per written slice (coordinates, value, gradient) plus metadata.csv.
inline void write_value_field_dir(const std::filesystem::path& dir, const GridValueField& v,
                                  const std::vector<std::pair<std::string, std::string>>& metadata,
                                  std::size_t stride = 1) {
  std::filesystem::create_directories(dir);
  const std::size_t n = v.modes();
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t j = 0; j < v.slices(); ++j) {
    if (j % stride != 0 && j + 1 != v.slices()) continue;
    std::ostringstream name;
    name << "slice_" << std::setw(4) << std::setfill('0') << j << ".csv";
    csv::Writer w(dir / name.str());
    const bool has_grad = j < v.gradients.size();
    std::vector<std::string> header;
    for (std::size_t k = 0; k < n; ++k) header.push_back("mode_" + std::to_string(k + 1));
    header.emplace_back("value");
    if (has_grad)
      for (std::size_t k = 0; k < n; ++k) header.push_back("grad_" + std::to_string(k + 1));
    w.header(header);
    std::vector<double> x(n);
    std::vector<std::string> row;
    for (std::size_t g = 0; g < v.grid.size(); ++g) {
      v.grid.node(g, x);
      row.clear();
      for (double c : x) row.push_back(csv::num(c));
      row.push_back(csv::num(v.values[j][g]));
      if (has_grad)
        for (std::size_t k = 0; k < n; ++k) row.push_back(csv::num(v.gradients[j][g * n + k]));
      w.row_strings(row);
    }
  }
  csv::Writer meta(dir / "metadata.csv");
  meta.header({"key", "value"});
  meta.row("slices", v.slices());
  meta.row("grid_points", v.grid.counts()[0]);
  meta.row("half_width", v.grid.half_width());
  meta.row("sup_norm", v.sup_norm());
  meta.row("weighted_gradient_norm", v.weighted_gradient_norm());
  meta.row("tail_mass", v.tail_mass);
  for (const auto& [k, val] : metadata) meta.row(k, val);
}

}  // namespace mfg
