#pragma once

// Particle realization of the drifted OU flow (exponential Euler: exact OU
// transition with the drift frozen over each step) and direct audits of the
// weak Fokker-Planck identity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/measure.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"
#include "mfg/spectral_core.hpp"

namespace mfg {

/// The SDE drift b(t, x): dX = (AX + b) dt + dW. `step` is the index of the
/// mesh time t, so grid-backed drifts can read the matching slice.
struct DriftField {
  using Eval = std::function<void(double t, std::size_t step, std::span<const double> x, std::span<double> out)>;

  std::string name;
  std::size_t modes = 1;
  double bound = 0.0;  // declared R >= sup |b|
  Eval eval;

  /// Evaluates and enforces the declared bound.
  void operator()(double t, std::size_t step, std::span<const double> x, std::span<double> out) const {
    eval(t, step, x, out);
    double s = 0.0;
    for (std::size_t k = 0; k < modes; ++k) s += out[k] * out[k];
    if (std::sqrt(s) > bound * (1.0 + 1e-12) + 1e-12) {
      std::ostringstream os;
      os << "drift '" << name << "' exceeds its declared bound " << bound << " (|b| = " << std::sqrt(s)
         << " at t = " << t << ")";
      throw std::runtime_error(os.str());
    }
  }

  static DriftField zero(std::size_t modes) {
    return {"zero", modes, 0.0, [modes](double, std::size_t, std::span<const double>, std::span<double> out) {
              std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(modes), 0.0);
            }};
  }

  static DriftField constant(std::vector<double> c) {
    double norm = 0.0;
    for (double v : c) norm += v * v;
    const std::size_t n = c.size();
    return {"constant", n, std::sqrt(norm),
            [c = std::move(c)](double, std::size_t, std::span<const double>, std::span<double> out) {
              std::copy(c.begin(), c.end(), out.begin());
            }};
  }

  /// b(t) = c cos(2 pi f t): spatially constant but time-varying, so the
  /// frozen-drift step carries a genuine first-order bias.
  static DriftField oscillating(std::vector<double> c, double frequency = 1.0) {
    double norm = 0.0;
    for (double v : c) norm += v * v;
    const std::size_t n = c.size();
    return {"oscillating", n, std::sqrt(norm),
            [c = std::move(c), frequency](double t, std::size_t, std::span<const double>, std::span<double> out) {
              const double s = std::cos(2.0 * std::numbers::pi * frequency * t);
              for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] * s;
            }};
  }

  /// b_k(t, x) = -(amplitude / sqrt(N)) tanh(x_k + phase(t)): bounded,
  /// Lipschitz, state and time dependent.
  static DriftField restoring(std::size_t modes, double amplitude) {
    const double scale = amplitude / std::sqrt(static_cast<double>(modes));
    return {"restoring", modes, amplitude,
            [modes, scale](double t, std::size_t, std::span<const double> x, std::span<double> out) {
              for (std::size_t k = 0; k < modes; ++k) out[k] = -scale * std::tanh(x[k] + 0.5 * std::sin(3.0 * t));
            }};
  }
};

struct FpConfig {
  double horizon = 1.0;
  double step = 0.01;
  std::size_t particles = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("FpConfig: horizon must be positive");
    if (!(step > 0.0) || step > horizon) throw std::invalid_argument("FpConfig: step must lie in (0, horizon]");
    if (particles == 0) throw std::invalid_argument("FpConfig: particles must be positive");
  }
};

/// Propagates a given initial cloud. Normal draws are keyed by
/// (seed, particle, step, mode).
inline MeasurePath propagate_from(const SpectrumSpec& spec, const DriftField& w, const ParticleMeasure& x0,
                                  const FpConfig& cfg) {
  cfg.validate();
  require_valid(spec);
  const std::size_t n = spec.modes();
  if (x0.modes() != n) throw std::invalid_argument("propagate: initial law has the wrong mode count");
  if (w.modes != n) throw std::invalid_argument("propagate: drift has the wrong mode count");
  const auto times = uniform_mesh(cfg.horizon, cfg.step);
  const std::size_t steps = times.size() - 1;
  const std::size_t m = x0.size();
  const std::uint64_t noise_seed = derive_seed(cfg.seed, kStepStream);

  std::vector<ParticleMeasure> measures;
  measures.reserve(times.size());
  measures.push_back(x0);
  std::vector<double> state(x0.data());
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = times[j];
    const double h = times[j + 1] - times[j];
    std::vector<double> decay(n), gain(n), noise(n);
    for (std::size_t k = 0; k < n; ++k) {
      decay[k] = semigroup_factor(spec, k, h);
      gain[k] = drift_factor(spec, k, h);
      noise[k] = std::sqrt(covariance_qk(spec, k, h));
    }
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
      std::vector<double> b(n);
      for (std::size_t i = begin; i < end; ++i) {
        std::span<double> x(state.data() + i * n, n);
        w(t, j, x, b);
        for (std::size_t k = 0; k < n; ++k) {
          x[k] = decay[k] * x[k] + gain[k] * b[k] + noise[k] * counter_normal(noise_seed, i, j, k);
          if (!std::isfinite(x[k])) throw std::runtime_error("propagate: non-finite coordinate produced");
        }
      }
    });
    measures.emplace_back(n, state);
  }
  return MeasurePath(times, std::move(measures));
}

inline MeasurePath propagate(const SpectrumSpec& spec, const DriftField& w, const InitialLaw& m0,
                             const FpConfig& cfg) {
  cfg.validate();
  if (m0.modes() != spec.modes()) throw std::invalid_argument("propagate: m0 has the wrong mode count");
  return propagate_from(spec, w, m0.sample(cfg.particles, derive_seed(cfg.seed, kInitialStream)), cfg);
}

/// phi(t, x) = psi(t) * trig(<x, h> + theta) with trig = cos or sin and psi a
/// polynomial in t.
struct TestFunction {
  std::vector<double> frequency;          // h, indexed by mode
  double phase = 0.0;                     // theta
  bool sine = false;
  std::vector<double> psi = {1.0};        // psi(t) = sum_i psi[i] t^i

  double psi_value(double t) const {
    double v = 0.0;
    for (std::size_t i = psi.size(); i-- > 0;) v = v * t + psi[i];
    return v;
  }
  double psi_derivative(double t) const {
    double v = 0.0;
    for (std::size_t i = psi.size(); i-- > 1;) v = v * t + static_cast<double>(i) * psi[i];
    return v;
  }

  /// Throws unless h vanishes beyond the first `modes` coordinates.
  void require_supported(std::size_t modes) const {
    for (std::size_t k = modes; k < frequency.size(); ++k)
      if (frequency[k] != 0.0)
        throw std::invalid_argument("test function is not supported on the simulated modes");
  }

  double argument(std::span<const double> x) const {
    double u = phase;
    for (std::size_t k = 0; k < std::min(x.size(), frequency.size()); ++k) u += frequency[k] * x[k];
    return u;
  }
  double trig(double u) const { return sine ? std::sin(u) : std::cos(u); }
  double trig_prime(double u) const { return sine ? std::cos(u) : -std::sin(u); }

  double value(double t, std::span<const double> x) const { return psi_value(t) * trig(argument(x)); }
  double time_derivative(double t, std::span<const double> x) const {
    return psi_derivative(t) * trig(argument(x));
  }
  /// D phi = psi trig'(u) h.
  void gradient(double t, std::span<const double> x, std::span<double> out) const {
    const double s = psi_value(t) * trig_prime(argument(x));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = k < frequency.size() ? s * frequency[k] : 0.0;
  }
  /// L0 phi = <x, A* D phi> + Tr(D^2 phi) / 2, with D^2 phi = -phi h h^T.
  double generator(const SpectrumSpec& spec, double t, std::span<const double> x) const {
    const double u = argument(x);
    const double p = psi_value(t);
    double ax = 0.0, h2 = 0.0;
    for (std::size_t k = 0; k < std::min(x.size(), frequency.size()); ++k) {
      ax += spec.eigenvalue(k) * frequency[k] * x[k];
      h2 += frequency[k] * frequency[k];
    }
    return p * trig_prime(u) * ax - 0.5 * h2 * p * trig(u);
  }
};

namespace detail {
inline std::size_t mesh_index(const MeasurePath& path, double t) {
  for (std::size_t j = 0; j < path.steps(); ++j)
    if (std::abs(path.times()[j] - t) <= 1e-12 * (1.0 + std::abs(t))) return j;
  throw std::invalid_argument("weak_form_residual: time is not on the path mesh");
}
}  // namespace detail

/// Per-trajectory contributions r_i whose mean is the weak-form residual
/// int phi(t) dm(t) - int phi(0) dm(0) - int_0^t int [d_t phi + L0 phi + <b, D phi>] dm ds,
/// with the time integral by trapezoid on the mesh.
inline std::vector<double> weak_form_contributions(const SpectrumSpec& spec, const MeasurePath& path,
                                                   const DriftField& w, const TestFunction& phi, double t) {
  const std::size_t n = path.modes();
  phi.require_supported(n);
  const std::size_t jt = detail::mesh_index(path, t);
  const std::size_t m = path.at(0).size();
  for (std::size_t j = 0; j <= jt; ++j)
    if (path.at(j).size() != m) throw std::invalid_argument("weak_form_residual: particle count changes along path");
  std::vector<double> r(m, 0.0);
  if (jt == 0) return r;
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    std::vector<double> b(n), dphi(n);
    for (std::size_t i = begin; i < end; ++i) {
      double integral = 0.0;
      for (std::size_t j = 0; j <= jt; ++j) {
        const double s = path.times()[j];
        auto x = path.at(j).particle(i);
        w(s, j, x, b);
        phi.gradient(s, x, dphi);
        double drift = 0.0;
        for (std::size_t k = 0; k < n; ++k) drift += b[k] * dphi[k];
        const double integrand = phi.time_derivative(s, x) + phi.generator(spec, s, x) + drift;
        double weight = 0.0;
        if (j > 0) weight += 0.5 * (path.times()[j] - path.times()[j - 1]);
        if (j < jt) weight += 0.5 * (path.times()[j + 1] - path.times()[j]);
        integral += weight * integrand;
      }
      r[i] = phi.value(t, path.at(jt).particle(i)) - phi.value(0.0, path.at(0).particle(i)) - integral;
    }
  });
  return r;
}

inline double weak_form_residual(const SpectrumSpec& spec, const MeasurePath& path, const DriftField& w,
                                 const TestFunction& phi, double t) {
  const auto r = weak_form_contributions(spec, path, w, phi, t);
  double s = 0.0;
  for (double v : r) s += v;
  return s / static_cast<double>(r.size());
}

struct ResidualStats {
  double residual = 0.0;
  double bootstrap_stderr = 0.0;
};

/// Residual plus its bootstrap standard error over particle trajectories.
inline ResidualStats weak_form_residual_stats(const SpectrumSpec& spec, const MeasurePath& path, const DriftField& w,
                                              const TestFunction& phi, double t, std::size_t resamples = 200,
                                              std::uint64_t seed = 0) {
  const auto r = weak_form_contributions(spec, path, w, phi, t);
  const std::size_t m = r.size();
  ResidualStats out;
  for (double v : r) out.residual += v;
  out.residual /= static_cast<double>(m);
  if (resamples < 2) return out;
  double s = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += r[hash_key(seed, kBootstrapStream, b, i) % m];
    mean /= static_cast<double>(m);
    s += mean;
    s2 += mean * mean;
  }
  const double rb = static_cast<double>(resamples);
  out.bootstrap_stderr = std::sqrt(std::max(0.0, (s2 - s * s / rb) / (rb - 1.0)));
  return out;
}

}  // namespace mfg
