#pragma once

// Capped-control Hamiltonians, the standard couplings (product, vector
// product, convolution), the assumption checkers, and the shipped models.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/hamiltonian.hpp"
#include "mfg/measure.hpp"
#include "mfg/measure_kit.hpp"
#include "mfg/problem.hpp"
#include "mfg/rng.hpp"
#include "mfg/spectral_core.hpp"

namespace mfg {

/// A symmetric, uniformly convex running cost f1 with its derivative and the
/// inverse of the derivative on [0, inf).
struct ConvexProfile {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> derivative;
  std::function<double(double)> derivative_inverse;
  double inverse_lipschitz = 0.0;  // Lipschitz constant of (f1')^{-1}

  /// f1(s) = a s^2.
  static ConvexProfile quadratic(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("quadratic profile needs a > 0");
    return {"quadratic",
            [a](double s) { return a * s * s; },
            [a](double s) { return 2.0 * a * s; },
            [a](double r) { return r / (2.0 * a); },
            1.0 / (2.0 * a)};
  }
};

inline double euclidean_norm(std::span<const double> p) {
  double s = 0.0;
  for (double c : p) s += c * c;
  return std::sqrt(s);
}

/// H1(p) = sup_{|alpha| <= R} <alpha, p> - f1(|alpha|).
inline double eval_H1(std::span<const double> p, double R, const ConvexProfile& f1) {
  const double r = euclidean_norm(p);
  if (r < f1.derivative(R)) {
    const double s = f1.derivative_inverse(r);
    return s * r - f1.f(s);
  }
  return R * r - f1.f(R);
}

/// The maximizer of H1: (f1')^{-1}(|p|) p/|p|, saturating at R p/|p|.
inline void eval_DH1(std::span<const double> p, double R, const ConvexProfile& f1, std::span<double> out) {
  const double r = euclidean_norm(p);
  if (r == 0.0) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(p.size()), 0.0);
    return;
  }
  const double s = r < f1.derivative(R) ? f1.derivative_inverse(r) : R;
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = s * p[k] / r;
}

inline std::vector<double> eval_DH1(std::span<const double> p, double R, const ConvexProfile& f1) {
  std::vector<double> out(p.size());
  eval_DH1(p, R, f1, out);
  return out;
}

/// Bounded Lipschitz drift offset b0(x).
struct DriftOffset {
  std::string name = "zero";
  std::vector<double> amplitude;  // b0_k(x) = amplitude_k tanh(x_k); empty means zero
  double bound() const {
    double s = 0.0;
    for (double a : amplitude) s += a * a;
    return std::sqrt(s);
  }
  void eval(std::span<const double> x, std::span<double> out) const {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = k < amplitude.size() ? amplitude[k] * std::tanh(x[k]) : 0.0;
  }
  static DriftOffset zero() { return {}; }
  static DriftOffset tanh_profile(std::vector<double> amplitude) { return {"tanh", std::move(amplitude)}; }
};

/// H0(x, p) = H1(p) - <b0(x), p>, so H0_p = DH1(p) - b0(x).
inline ControlHamiltonian capped_control_hamiltonian(std::size_t modes, double R, ConvexProfile f1,
                                                     DriftOffset b0 = DriftOffset::zero()) {
  if (!(R > 0.0)) throw std::invalid_argument("capped control needs R > 0");
  auto prof = std::make_shared<const ConvexProfile>(std::move(f1));
  auto off = std::make_shared<const DriftOffset>(std::move(b0));
  ControlHamiltonian h;
  h.name = "capped_" + prof->name;
  h.value = [=](std::span<const double> x, std::span<const double> p) {
    double b[3] = {0, 0, 0};
    std::vector<double> heap;
    std::span<double> bs = modes <= 3 ? std::span<double>(b, modes) : std::span<double>(heap = std::vector<double>(modes));
    off->eval(x, bs);
    double dot = 0.0;
    for (std::size_t k = 0; k < modes; ++k) dot += bs[k] * p[k];
    return eval_H1(p, R, *prof) - dot;
  };
  h.gradient_p = [=](std::span<const double> x, std::span<const double> p, std::span<double> out) {
    eval_DH1(p, R, *prof, out);
    for (std::size_t k = 0; k < modes; ++k) out[k] -= k < off->amplitude.size() ? off->amplitude[k] * std::tanh(x[k]) : 0.0;
  };
  h.gradient_bound = R + off->bound();
  h.lipschitz_p = R + off->bound();
  h.gradient_lipschitz = prof->inverse_lipschitz;
  return h;
}

// ----------------------------------------------------------------- couplings

struct CouplingSpec {
  enum class Kind { F1, F2, Convolution, Custom };
  Kind kind = Kind::F1;
  double weight = 1.0;  // F = weight * F_kind; weight < 0 breaks monotonicity

  // F1: h1(x) int h1 dmu.
  std::function<double(std::span<const double>)> h1;
  // F2: <h2(x), int h2 dmu>.
  std::size_t h2_dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> h2;
  double h_sup = 1.0;        // sup |h1| or sup |h2|
  double h_lipschitz = 1.0;  // Lipschitz constant of h1 or h2

  // Convolution: int l(z, rho*mu(z)) rho(z - x) nu(dz), rho*mu(z) = int rho(z - u) mu(du).
  std::function<double(std::span<const double>, double)> ell;
  std::function<double(std::span<const double>)> rho;
  ParticleMeasure nu;      // support sample of nu
  double nu_mass = 1.0;    // total mass of nu, spread evenly over the sample
  double ell_sup = 1.0;
  double ell_lipschitz = 1.0;  // in r
  double rho_sup = 1.0;
  double rho_lipschitz = 1.0;

  MeasureCoupling custom;

  std::string describe() const {
    switch (kind) {
      case Kind::F1: return "F1";
      case Kind::F2: return "F2";
      case Kind::Convolution: return "convolution";
      case Kind::Custom: return custom.name.empty() ? "custom" : custom.name;
    }
    return "unknown";
  }

  static CouplingSpec product(std::function<double(std::span<const double>)> h1, double sup, double lip,
                              double weight = 1.0) {
    CouplingSpec c;
    c.kind = Kind::F1;
    c.h1 = std::move(h1);
    c.h_sup = sup;
    c.h_lipschitz = lip;
    c.weight = weight;
    return c;
  }

  static CouplingSpec vector_product(std::size_t dim, std::function<void(std::span<const double>, std::span<double>)> h2,
                                     double sup, double lip, double weight = 1.0) {
    CouplingSpec c;
    c.kind = Kind::F2;
    c.h2_dim = dim;
    c.h2 = std::move(h2);
    c.h_sup = sup;
    c.h_lipschitz = lip;
    c.weight = weight;
    return c;
  }
};

namespace detail {

inline double mean_h1(const CouplingSpec& c, const ParticleMeasure& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += c.h1(mu.particle(i));
  return s / static_cast<double>(mu.size());
}

inline std::vector<double> mean_h2(const CouplingSpec& c, const ParticleMeasure& mu) {
  std::vector<double> acc(c.h2_dim, 0.0), h(c.h2_dim);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    c.h2(mu.particle(i), h);
    for (std::size_t d = 0; d < c.h2_dim; ++d) acc[d] += h[d];
  }
  for (double& a : acc) a /= static_cast<double>(mu.size());
  return acc;
}

inline double rho_shift(const CouplingSpec& c, std::span<const double> z, std::span<const double> u,
                        std::vector<double>& buf) {
  for (std::size_t k = 0; k < z.size(); ++k) buf[k] = z[k] - u[k];
  return c.rho(buf);
}

}  // namespace detail

/// x -> F(x, mu) with the measure integrals precomputed.
inline ScalarFn freeze_coupling(const CouplingSpec& c, const ParticleMeasure& mu) {
  if (mu.empty()) throw std::invalid_argument("coupling_value: empty measure");
  const double w = c.weight;
  switch (c.kind) {
    case CouplingSpec::Kind::F1: {
      const double m = detail::mean_h1(c, mu);
      auto h1 = c.h1;
      return [h1, m, w](std::span<const double> x) { return w * h1(x) * m; };
    }
    case CouplingSpec::Kind::F2: {
      auto m = detail::mean_h2(c, mu);
      auto h2 = c.h2;
      const std::size_t dim = c.h2_dim;
      return [h2, m, w, dim](std::span<const double> x) {
        double buf[8];
        std::vector<double> heap;
        std::span<double> h = dim <= 8 ? std::span<double>(buf, dim) : std::span<double>(heap = std::vector<double>(dim));
        h2(x, h);
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += h[d] * m[d];
        return w * s;
      };
    }
    case CouplingSpec::Kind::Convolution: {
      if (c.nu.empty()) throw std::invalid_argument("convolution coupling: empty nu sample");
      const std::size_t n = c.nu.modes();
      std::vector<double> coeff(c.nu.size());
      std::vector<double> buf(n);
      for (std::size_t l = 0; l < c.nu.size(); ++l) {
        auto z = c.nu.particle(l);
        double conv = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) conv += detail::rho_shift(c, z, mu.particle(i), buf);
        conv /= static_cast<double>(mu.size());
        coeff[l] = c.ell(z, conv) * c.nu_mass / static_cast<double>(c.nu.size());
      }
      auto rho = c.rho;
      auto nu = c.nu;
      return [rho, nu, coeff = std::move(coeff), w, n](std::span<const double> x) {
        std::vector<double> d(n);
        double s = 0.0;
        for (std::size_t l = 0; l < nu.size(); ++l) {
          for (std::size_t k = 0; k < n; ++k) d[k] = nu.coord(l, k) - x[k];
          s += coeff[l] * rho(d);
        }
        return w * s;
      };
    }
    case CouplingSpec::Kind::Custom:
      return c.custom.freeze(mu);
  }
  throw std::logic_error("unknown coupling kind");
}

inline double coupling_value(const CouplingSpec& c, std::span<const double> x, const ParticleMeasure& mu) {
  return freeze_coupling(c, mu)(x);
}

inline double coupling_sup_bound(const CouplingSpec& c) {
  const double w = std::abs(c.weight);
  switch (c.kind) {
    case CouplingSpec::Kind::F1:
    case CouplingSpec::Kind::F2: return w * c.h_sup * c.h_sup;
    case CouplingSpec::Kind::Convolution: return w * c.nu_mass * c.ell_sup * c.rho_sup;
    case CouplingSpec::Kind::Custom: return c.custom.sup_bound;
  }
  return 0.0;
}

/// Declared C with |F(x, mu) - F(x, nu)| <= C d_1(mu, nu).
inline double coupling_measure_lipschitz(const CouplingSpec& c) {
  const double w = std::abs(c.weight);
  switch (c.kind) {
    case CouplingSpec::Kind::F1:
    case CouplingSpec::Kind::F2: return w * c.h_sup * c.h_lipschitz;
    case CouplingSpec::Kind::Convolution: return w * c.nu_mass * c.rho_sup * c.ell_lipschitz * c.rho_lipschitz;
    case CouplingSpec::Kind::Custom: return c.custom.lipschitz_measure;
  }
  return 0.0;
}

inline MeasureCoupling to_measure_coupling(const CouplingSpec& c) {
  if (c.kind == CouplingSpec::Kind::Custom) return c.custom;
  auto shared = std::make_shared<const CouplingSpec>(c);
  MeasureCoupling m;
  m.name = (c.weight < 0.0 ? "-" : "") + c.describe();
  m.freeze = [shared](const ParticleMeasure& mu) { return freeze_coupling(*shared, mu); };
  m.sup_bound = coupling_sup_bound(c);
  m.lipschitz_measure = coupling_measure_lipschitz(c);
  m.measure_dependent = c.weight != 0.0;
  return m;
}

// ------------------------------------------------------------- monotonicity

/// Random measure pairs: Gaussian clouds with random means and variances,
/// Dirac pairs, and pooled mixtures.
struct MeasurePairSampler {
  std::size_t modes = 1;
  std::size_t max_particles = 48;

  std::pair<ParticleMeasure, ParticleMeasure> operator()(std::uint64_t seed, std::size_t trial) const {
    CounterStream rng(derive_seed(seed, kSamplerStream, trial));
    const auto kind = rng.index(3);
    auto cloud = [&](std::size_t m) {
      std::vector<double> mean(modes), sd(modes), coords(m * modes);
      for (std::size_t k = 0; k < modes; ++k) {
        mean[k] = rng.uniform(-2.0, 2.0);
        sd[k] = rng.uniform(0.05, 1.5);
      }
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < modes; ++k) coords[i * modes + k] = mean[k] + sd[k] * rng.normal();
      return ParticleMeasure(modes, std::move(coords));
    };
    if (kind == 0) {
      std::vector<double> a(modes), b(modes);
      for (std::size_t k = 0; k < modes; ++k) {
        a[k] = rng.uniform(-3.0, 3.0);
        b[k] = rng.uniform(-3.0, 3.0);
      }
      return {ParticleMeasure::dirac(a, 1), ParticleMeasure::dirac(b, 1)};
    }
    const std::size_t m1 = 2 + rng.index(max_particles - 1);
    const std::size_t m2 = 2 + rng.index(max_particles - 1);
    if (kind == 1) return {cloud(m1), cloud(m2)};
    auto a = cloud(m1), b = cloud(m1), c = cloud(m1);
    const double lam = rng.uniform(0.1, 0.9);
    return {mix(a, b, lam, rng.next_bits()), mix(a, c, lam, rng.next_bits())};
  }
};

struct MonotonicityReport {
  std::size_t trials = 0;
  double min_pairing = 0.0;
  std::size_t argmin = 0;
  double min_slack_margin = 0.0;  // min over trials of pairing + 1e-9 + 3 stderr
  /// Max |pairing - weight |int h dmu1 - int h dmu2|^2| for F1/F2, else absent.
  std::optional<double> closed_form_deviation;
  std::size_t zero_pairings = 0;  // nondegenerate trials with |pairing| <= 1e-14
  bool passed = false;
};

/// Pairing int (F(., mu1) - F(., mu2)) d(mu1 - mu2) with the standard error
/// of the difference of empirical means.
inline std::pair<double, double> monotonicity_pairing(const CouplingSpec& c, const ParticleMeasure& mu1,
                                                      const ParticleMeasure& mu2) {
  const auto f1 = freeze_coupling(c, mu1);
  const auto f2 = freeze_coupling(c, mu2);
  auto moments = [&](const ParticleMeasure& mu) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double d = f1(mu.particle(i)) - f2(mu.particle(i));
      s += d;
      s2 += d * d;
    }
    const double m = static_cast<double>(mu.size());
    const double mean = s / m;
    const double var = mu.size() > 1 ? std::max(0.0, (s2 - m * mean * mean) / (m - 1.0)) : 0.0;
    return std::pair{mean, var / m};
  };
  const auto [a, va] = moments(mu1);
  const auto [b, vb] = moments(mu2);
  return {a - b, std::sqrt(va + vb)};
}

inline MonotonicityReport monotonicity_check(const CouplingSpec& c, const MeasurePairSampler& sampler,
                                             std::size_t trials, std::uint64_t seed) {
  MonotonicityReport r;
  r.trials = trials;
  const bool closed = c.kind == CouplingSpec::Kind::F1 || c.kind == CouplingSpec::Kind::F2;
  double deviation = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto [mu1, mu2] = sampler(seed, t);
    const auto [pairing, se] = monotonicity_pairing(c, mu1, mu2);
    if (t == 0 || pairing < r.min_pairing) {
      r.min_pairing = pairing;
      r.argmin = t;
    }
    const double margin = pairing + 1e-9 + 3.0 * se;
    r.min_slack_margin = t == 0 ? margin : std::min(r.min_slack_margin, margin);
    if (!(mu1 == mu2) && std::abs(pairing) <= 1e-14) ++r.zero_pairings;
    if (closed) {
      double gap2 = 0.0;
      if (c.kind == CouplingSpec::Kind::F1) {
        const double d = detail::mean_h1(c, mu1) - detail::mean_h1(c, mu2);
        gap2 = d * d;
      } else {
        const auto a = detail::mean_h2(c, mu1), b = detail::mean_h2(c, mu2);
        for (std::size_t d = 0; d < a.size(); ++d) gap2 += (a[d] - b[d]) * (a[d] - b[d]);
      }
      deviation = std::max(deviation, std::abs(pairing - c.weight * gap2));
    }
  }
  if (closed) r.closed_form_deviation = deviation;
  r.passed = trials > 0 && r.min_slack_margin >= 0.0;
  return r;
}

// ---------------------------------------------------------------- assumptions

struct AssumptionReport {
  std::size_t trials = 0;
  double worst_value_ratio = 0.0;     // |H - H'| / (|p - p'| + d_1)
  double worst_gradient_ratio = 0.0;  // |H_p - H_p'| / (|p - p'| + d_1)
  double worst_measure_ratio = 0.0;   // |H(mu) - H(mu')| / d_1 at fixed (x, p)
  double worst_gradient_norm = 0.0;   // sup |H_p|
  double declared_lipschitz = 0.0;
  double declared_gradient_lipschitz = 0.0;
  double declared_bound = 0.0;
  bool lipschitz_ok = true;
  bool gradient_lipschitz_ok = true;
  bool bound_ok = true;
  bool passed() const { return lipschitz_ok && gradient_lipschitz_ok && bound_ok; }
};

inline AssumptionReport assumption_check(const HamiltonianSpec& h, std::size_t trials, std::uint64_t seed) {
  AssumptionReport r;
  r.trials = trials;
  r.declared_lipschitz = h.lipschitz;
  r.declared_gradient_lipschitz = h.gradient_lipschitz;
  r.declared_bound = h.hp_bound;
  const std::size_t n = h.modes;
  const double p_scale = 2.0 * std::max(1.0, h.hp_bound) + 2.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CounterStream rng(derive_seed(seed, kSamplerStream, t));
    std::vector<double> x(n), p(n), q(n), gp(n), gq(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = 2.0 * rng.normal();
      p[k] = rng.uniform(-p_scale, p_scale);
      q[k] = rng.index(2) == 0 ? p[k] + 0.1 * rng.normal() : rng.uniform(-p_scale, p_scale);
    }
    auto cloud = [&]() {
      std::vector<double> coords(16 * n);
      const double shift = rng.uniform(-1.5, 1.5);
      for (double& c : coords) c = shift + rng.normal();
      return ParticleMeasure(n, std::move(coords));
    };
    const auto mu = cloud(), nu = cloud();
    const double d1 = wasserstein1(mu, nu);
    const auto a = h.freeze(mu), b = h.freeze(nu);
    double dp = 0.0;
    for (std::size_t k = 0; k < n; ++k) dp += (p[k] - q[k]) * (p[k] - q[k]);
    dp = std::sqrt(dp);
    const double den = dp + d1;
    a.gradient_p(x, p, gp);
    b.gradient_p(x, q, gq);
    double dg = 0.0;
    for (std::size_t k = 0; k < n; ++k) dg += (gp[k] - gq[k]) * (gp[k] - gq[k]);
    if (den > 1e-12) {
      r.worst_value_ratio = std::max(r.worst_value_ratio, std::abs(a.value(x, p) - b.value(x, q)) / den);
      r.worst_gradient_ratio = std::max(r.worst_gradient_ratio, std::sqrt(dg) / den);
    }
    if (d1 > 1e-12)
      r.worst_measure_ratio = std::max(r.worst_measure_ratio, std::abs(a.value(x, p) - b.value(x, p)) / d1);
    r.worst_gradient_norm = std::max({r.worst_gradient_norm, euclidean_norm(gp), euclidean_norm(gq)});
  }
  const double slack = 1.0 + 1e-9;
  r.lipschitz_ok = r.worst_value_ratio <= h.lipschitz * slack + 1e-12;
  r.gradient_lipschitz_ok = r.worst_gradient_ratio <= h.gradient_lipschitz * slack + 1e-12;
  r.bound_ok = r.worst_gradient_norm <= h.hp_bound * slack + 1e-12;
  return r;
}

// ------------------------------------------------------------- shipped models

struct ShippedModel {
  MFGProblem problem;
  CouplingSpec coupling;
  bool declared_monotone = true;
};

/// One-mode capped-control model: lambda = -1, f1(s) = s^2, R = 1, b0 = 0,
/// F = kappa h1(x) int h1 dmu with h1 = tanh(x_1), G(x) = 1.5 tanh(x_1 - 0.5),
/// m0 = delta_0, T = 1.
inline ShippedModel monotone_one_mode(double kappa = 1.0) {
  auto coupling = CouplingSpec::product([](std::span<const double> x) { return std::tanh(x[0]); }, 1.0, 1.0, kappa);
  auto spectrum = SpectrumSpec::from_family(PowerFamily{1.0, 2.0}, 1, 0.25);
  auto h = separated_hamiltonian(1, capped_control_hamiltonian(1, 1.0, ConvexProfile::quadratic(1.0)),
                                 to_measure_coupling(coupling));
  h.name = "capped_quadratic_F1";
  auto g = MeasureCoupling::from_function(
      "terminal_tanh", [](std::span<const double> x) { return 1.5 * std::tanh(x[0] - 0.5); }, 1.5);
  MFGProblem p{kappa >= 0.0 ? "monotone_1mode" : "antimonotone_1mode", spectrum, h, g, InitialLaw::dirac({0.0}),
               1.0};
  return {std::move(p), std::move(coupling), kappa >= 0.0};
}

/// Negative control: the same model with coupling weight -5.
inline ShippedModel antimonotone_one_mode() { return monotone_one_mode(-5.0); }

/// Two-mode model with the vector product coupling F2, h2 = (tanh x_1, tanh x_2),
/// drift offset b0 = (0.3 tanh x_1, 0), Gaussian m0.
inline ShippedModel monotone_two_mode() {
  auto coupling = CouplingSpec::vector_product(
      2,
      [](std::span<const double> x, std::span<double> out) {
        out[0] = std::tanh(x[0]);
        out[1] = std::tanh(x[1]);
      },
      std::sqrt(2.0), 1.0, 1.0);
  auto spectrum = SpectrumSpec::from_family(PowerFamily{1.0, 2.0}, 2, 0.25);
  auto h = separated_hamiltonian(
      2, capped_control_hamiltonian(2, 1.0, ConvexProfile::quadratic(1.0), DriftOffset::tanh_profile({0.3, 0.0})),
      to_measure_coupling(coupling));
  h.name = "capped_quadratic_F2";
  auto g = MeasureCoupling::from_function(
      "terminal_tanh_sin",
      [](std::span<const double> x) { return std::tanh(x[0] - 0.3) + 0.5 * std::sin(x[1]); }, 1.5);
  MFGProblem p{"monotone_2mode", spectrum, h, g, InitialLaw::gaussian({0.5, 0.0}, {0.1, 0.05}), 1.0};
  return {std::move(p), std::move(coupling), true};
}

/// One-mode model with the convolution coupling: l(z, r) = r, rho a Gaussian
/// bump, nu uniform on 25 points of [-3, 3].
inline ShippedModel convolution_one_mode() {
  CouplingSpec c;
  c.kind = CouplingSpec::Kind::Convolution;
  c.ell = [](std::span<const double>, double r) { return r; };
  c.rho = [](std::span<const double> z) { return std::exp(-0.5 * z[0] * z[0]); };
  std::vector<double> pts;
  for (int i = 0; i < 25; ++i) pts.push_back(-3.0 + 0.25 * i);
  c.nu = ParticleMeasure(1, pts);
  c.nu_mass = 1.0;
  c.ell_sup = 1.0;  // r = rho*mu <= sup rho = 1
  c.ell_lipschitz = 1.0;
  c.rho_sup = 1.0;
  c.rho_lipschitz = std::exp(-0.5);  // max |d/dz e^{-z^2/2}|
  auto spectrum = SpectrumSpec::from_family(PowerFamily{1.0, 2.0}, 1, 0.25);
  auto h = separated_hamiltonian(1, capped_control_hamiltonian(1, 1.0, ConvexProfile::quadratic(1.0)),
                                 to_measure_coupling(c));
  h.name = "capped_quadratic_convolution";
  auto g = MeasureCoupling::from_function(
      "terminal_tanh", [](std::span<const double> x) { return 1.5 * std::tanh(x[0] - 0.5); }, 1.5);
  MFGProblem p{"convolution_1mode", spectrum, h, g, InitialLaw::gaussian({0.0}, {0.2}), 1.0};
  return {std::move(p), std::move(c), true};
}

inline std::vector<std::string> shipped_model_names() {
  return {"monotone_1mode", "antimonotone_1mode", "monotone_2mode", "convolution_1mode"};
}

inline ShippedModel shipped_model(const std::string& name) {
  if (name == "monotone_1mode") return monotone_one_mode();
  if (name == "antimonotone_1mode") return antimonotone_one_mode();
  if (name == "monotone_2mode") return monotone_two_mode();
  if (name == "convolution_1mode") return convolution_one_mode();
  throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace mfg
