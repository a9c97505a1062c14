#pragma once

// The diagonal generator A = diag(lambda_k) on the first N eigenmodes, its
// semigroup e^{tA}, and the per-mode Ornstein-Uhlenbeck covariance scalars.
// Mode indices are zero-based throughout the library: mode k here is the
// coordinate <x, e_{k+1}>.

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/measure.hpp"

namespace mfg {

/// lambda_k = -scale * k^exponent, k = 1, 2, ...
struct PowerFamily {
  double scale = 1.0;
  double exponent = 2.0;

  double eigenvalue(std::size_t one_based_k) const {
    return -scale * std::pow(static_cast<double>(one_based_k), exponent);
  }
};

struct SpectrumSpec {
  std::vector<double> eigenvalues;
  double delta = 0.5;
  std::optional<PowerFamily> family;

  std::size_t modes() const { return eigenvalues.size(); }

  static SpectrumSpec from_family(PowerFamily family, std::size_t modes, double delta) {
    SpectrumSpec s;
    s.delta = delta;
    s.family = family;
    for (std::size_t k = 1; k <= modes; ++k) s.eigenvalues.push_back(family.eigenvalue(k));
    return s;
  }

  static SpectrumSpec from_list(std::vector<double> eigenvalues, double delta = 0.5) {
    SpectrumSpec s;
    s.eigenvalues = std::move(eigenvalues);
    s.delta = delta;
    return s;
  }

  double eigenvalue(std::size_t k) const {
    if (k >= eigenvalues.size()) throw std::out_of_range("SpectrumSpec: mode index out of range");
    return eigenvalues[k];
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  /// Set when an analytic family was declared: whether p(1 - delta) > 1.
  std::optional<bool> trace_condition;

  bool passed() const { return violations.empty(); }
};

inline ValidationReport validate_spectrum(const SpectrumSpec& spec) {
  ValidationReport report;
  if (spec.eigenvalues.empty()) report.violations.emplace_back("truncation level N must be >= 1");
  for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k) {
    const double lam = spec.eigenvalues[k];
    if (!std::isfinite(lam) || !(lam < 0.0)) {
      std::ostringstream os;
      os << "eigenvalue " << k + 1 << " = " << lam << " is not strictly negative";
      report.violations.push_back(os.str());
    }
    if (k > 0 && lam > spec.eigenvalues[k - 1]) {
      std::ostringstream os;
      os << "eigenvalues increase at mode " << k + 1 << " (" << spec.eigenvalues[k - 1] << " -> " << lam << ")";
      report.violations.push_back(os.str());
    }
  }
  if (!(spec.delta > 0.0) || spec.delta > 1.0) report.violations.emplace_back("delta must lie in (0, 1]");

  if (spec.family) {
    const auto& f = *spec.family;
    if (!(f.scale > 0.0) || !(f.exponent > 0.0))
      report.violations.emplace_back("family scale and exponent must be positive");
    for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k) {
      const double expected = f.eigenvalue(k + 1);
      if (std::abs(spec.eigenvalues[k] - expected) > 1e-12 * std::abs(expected)) {
        std::ostringstream os;
        os << "eigenvalue " << k + 1 << " does not match the declared family";
        report.violations.push_back(os.str());
      }
    }
    const bool ok = f.exponent * (1.0 - spec.delta) > 1.0;
    report.trace_condition = ok;
    if (!ok) {
      std::ostringstream os;
      os << "trace condition fails: p(1 - delta) = " << f.exponent * (1.0 - spec.delta) << " <= 1";
      report.violations.push_back(os.str());
    }
  } else {
    report.warnings.emplace_back("no analytic family declared; trace condition not certified for a finite list");
  }
  return report;
}

inline void require_valid(const SpectrumSpec& spec) {
  for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k)
    if (!(spec.eigenvalues[k] < 0.0)) throw std::invalid_argument("SpectrumSpec: eigenvalues must be negative");
  if (spec.eigenvalues.empty()) throw std::invalid_argument("SpectrumSpec: no modes");
}

/// e^{lambda_k t}.
inline double semigroup_factor(const SpectrumSpec& spec, std::size_t k, double t) {
  if (t < 0.0) throw std::invalid_argument("semigroup_factor: negative time");
  return std::exp(spec.eigenvalue(k) * t);
}

/// q_k(t) = (1 - e^{2 lambda_k t}) / (2|lambda_k|), in the cancellation-free form.
inline double covariance_qk(const SpectrumSpec& spec, std::size_t k, double t) {
  if (t < 0.0) throw std::invalid_argument("covariance_qk: negative time");
  const double lam = spec.eigenvalue(k);
  return std::expm1(2.0 * lam * t) / (2.0 * lam);
}

/// (1 - e^{lambda_k h}) / |lambda_k|: the mild-form integral of a unit drift over a step.
inline double drift_factor(const SpectrumSpec& spec, std::size_t k, double h) {
  const double lam = spec.eigenvalue(k);
  return std::expm1(lam * h) / lam;
}

/// Likelihood-ratio weight e^{lambda_k t} / sqrt(q_k(t)); behaves like t^{-1/2}.
inline double smoothing_weight(const SpectrumSpec& spec, std::size_t k, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("smoothing_weight: requires t > 0");
  return semigroup_factor(spec, k, t) / std::sqrt(covariance_qk(spec, k, t));
}

struct AlphaBeta {
  double alpha = 0.0;  // 1 / (2|lambda_k|)
  double beta = 0.0;   // k-th second moment of m0
  bool beta_exact = true;
};

inline AlphaBeta alpha_beta(const SpectrumSpec& spec, std::size_t k, const InitialLaw& m0) {
  const double lam = spec.eigenvalue(k);
  if (k >= m0.modes()) throw std::out_of_range("alpha_beta: m0 has fewer modes than requested");
  return {1.0 / (2.0 * std::abs(lam)), m0.second_moment(k), m0.exact_moments()};
}

}  // namespace mfg
