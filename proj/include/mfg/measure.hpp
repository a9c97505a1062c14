#pragma once

// Equal-weight particle measures on truncated mode coordinates, time-indexed
// paths of them, and the initial law m0.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfg/rng.hpp"

namespace mfg {

class ParticleMeasure {
 public:
  ParticleMeasure() = default;

  /// coords is row-major: particle i occupies [i*modes, (i+1)*modes).
  ParticleMeasure(std::size_t modes, std::vector<double> coords) : modes_(modes), coords_(std::move(coords)) {
    if (modes_ == 0) throw std::invalid_argument("ParticleMeasure: zero modes");
    if (coords_.empty() || coords_.size() % modes_ != 0)
      throw std::invalid_argument("ParticleMeasure: coordinate count is not a positive multiple of modes");
    for (double c : coords_)
      if (!std::isfinite(c)) throw std::invalid_argument("ParticleMeasure: non-finite coordinate");
  }

  static ParticleMeasure dirac(std::span<const double> point, std::size_t particles) {
    std::vector<double> coords;
    coords.reserve(point.size() * particles);
    for (std::size_t i = 0; i < particles; ++i) coords.insert(coords.end(), point.begin(), point.end());
    return ParticleMeasure(point.size(), std::move(coords));
  }

  std::size_t size() const { return modes_ == 0 ? 0 : coords_.size() / modes_; }
  std::size_t modes() const { return modes_; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> particle(std::size_t i) const { return {coords_.data() + i * modes_, modes_}; }
  double coord(std::size_t i, std::size_t k) const { return coords_[i * modes_ + k]; }
  const std::vector<double>& data() const { return coords_; }

  friend bool operator==(const ParticleMeasure&, const ParticleMeasure&) = default;

 private:
  std::size_t modes_ = 0;
  std::vector<double> coords_;
};

/// Particle index i refers to the same trajectory at every mesh time when the
/// path was produced by propagation or pooling.
class MeasurePath {
 public:
  MeasurePath() = default;
  MeasurePath(std::vector<double> times, std::vector<ParticleMeasure> measures)
      : times_(std::move(times)), measures_(std::move(measures)) {
    if (times_.empty() || times_.size() != measures_.size())
      throw std::invalid_argument("MeasurePath: times and measures must be nonempty and equally long");
    if (times_.front() != 0.0) throw std::invalid_argument("MeasurePath: mesh must start at t = 0");
    for (std::size_t j = 1; j < times_.size(); ++j)
      if (!(times_[j] > times_[j - 1])) throw std::invalid_argument("MeasurePath: times must strictly increase");
    for (const auto& m : measures_)
      if (m.modes() != measures_.front().modes())
        throw std::invalid_argument("MeasurePath: measures disagree on mode count");
  }

  std::size_t steps() const { return times_.size(); }
  std::size_t modes() const { return measures_.front().modes(); }
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<ParticleMeasure>& measures() const { return measures_; }
  const ParticleMeasure& at(std::size_t j) const { return measures_.at(j); }

 private:
  std::vector<double> times_;
  std::vector<ParticleMeasure> measures_;
};

inline std::vector<double> uniform_mesh(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) throw std::invalid_argument("uniform_mesh: horizon and step must be positive");
  const auto n = static_cast<std::size_t>(std::llround(horizon / step));
  if (n == 0 || std::abs(static_cast<double>(n) * step - horizon) > 1e-9 * horizon)
    throw std::invalid_argument("uniform_mesh: step must divide the horizon");
  std::vector<double> t(n + 1);
  for (std::size_t j = 0; j <= n; ++j) t[j] = horizon * static_cast<double>(j) / static_cast<double>(n);
  return t;
}

inline bool same_mesh(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-12) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > tol * (1.0 + std::abs(a[j]))) return false;
  return true;
}

struct DiracLaw {
  std::vector<double> point;
};

struct ProductGaussianLaw {
  std::vector<double> mean;
  std::vector<double> variance;
};

struct EmpiricalLaw {
  ParticleMeasure sample;
};

/// m0: Dirac and product-Gaussian laws expose exact moments, an empirical
/// law exposes sample moments.
class InitialLaw {
 public:
  using Kind = std::variant<DiracLaw, ProductGaussianLaw, EmpiricalLaw>;

  InitialLaw(Kind kind) : kind_(std::move(kind)) {  // NOLINT(google-explicit-constructor)
    if (auto* g = std::get_if<ProductGaussianLaw>(&kind_)) {
      if (g->mean.size() != g->variance.size() || g->mean.empty())
        throw std::invalid_argument("ProductGaussian: mean and variance must have equal nonzero length");
      for (double v : g->variance)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("ProductGaussian: variances must be >= 0");
    } else if (auto* d = std::get_if<DiracLaw>(&kind_)) {
      if (d->point.empty()) throw std::invalid_argument("Dirac: empty point");
    } else if (std::get<EmpiricalLaw>(kind_).sample.empty()) {
      throw std::invalid_argument("Empirical: empty sample");
    }
  }

  static InitialLaw dirac(std::vector<double> point) { return InitialLaw(DiracLaw{std::move(point)}); }
  static InitialLaw gaussian(std::vector<double> mean, std::vector<double> variance) {
    return InitialLaw(ProductGaussianLaw{std::move(mean), std::move(variance)});
  }
  static InitialLaw empirical(ParticleMeasure sample) { return InitialLaw(EmpiricalLaw{std::move(sample)}); }

  const Kind& kind() const { return kind_; }

  std::size_t modes() const {
    return std::visit(
        [](const auto& k) -> std::size_t {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, DiracLaw>) return k.point.size();
          else if constexpr (std::is_same_v<T, ProductGaussianLaw>) return k.mean.size();
          else return k.sample.modes();
        },
        kind_);
  }

  bool exact_moments() const { return !std::holds_alternative<EmpiricalLaw>(kind_); }

  /// E <X, e_k>^2.
  double second_moment(std::size_t k) const {
    if (k >= modes()) throw std::out_of_range("InitialLaw::second_moment: mode index out of range");
    return std::visit(
        [k](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, DiracLaw>) {
            return law.point[k] * law.point[k];
          } else if constexpr (std::is_same_v<T, ProductGaussianLaw>) {
            return law.mean[k] * law.mean[k] + law.variance[k];
          } else {
            double s = 0.0;
            for (std::size_t i = 0; i < law.sample.size(); ++i) s += law.sample.coord(i, k) * law.sample.coord(i, k);
            return s / static_cast<double>(law.sample.size());
          }
        },
        kind_);
  }

  /// E |X|^4.
  double fourth_norm_moment() const {
    return std::visit(
        [](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, DiracLaw>) {
            double r2 = 0.0;
            for (double c : law.point) r2 += c * c;
            return r2 * r2;
          } else if constexpr (std::is_same_v<T, ProductGaussianLaw>) {
            // E(sum X_k^2)^2 = sum E X_k^4 + sum_{k != l} E X_k^2 E X_l^2
            const std::size_t n = law.mean.size();
            double total = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
              const double mu = law.mean[k], s2 = law.variance[k];
              total += mu * mu * mu * mu + 6.0 * mu * mu * s2 + 3.0 * s2 * s2;
              for (std::size_t l = 0; l < n; ++l)
                if (l != k) total += (mu * mu + s2) * (law.mean[l] * law.mean[l] + law.variance[l]);
            }
            return total;
          } else {
            double s = 0.0;
            for (std::size_t i = 0; i < law.sample.size(); ++i) {
              double r2 = 0.0;
              for (double c : law.sample.particle(i)) r2 += c * c;
              s += r2 * r2;
            }
            return s / static_cast<double>(law.sample.size());
          }
        },
        kind_);
  }

  /// Draws `particles` initial positions; deterministic in seed.
  ParticleMeasure sample(std::size_t particles, std::uint64_t seed) const {
    if (particles == 0) throw std::invalid_argument("InitialLaw::sample: zero particles");
    const std::size_t n = modes();
    std::vector<double> coords(particles * n);
    if (auto* d = std::get_if<DiracLaw>(&kind_)) {
      for (std::size_t i = 0; i < particles; ++i)
        for (std::size_t k = 0; k < n; ++k) coords[i * n + k] = d->point[k];
    } else if (auto* g = std::get_if<ProductGaussianLaw>(&kind_)) {
      for (std::size_t i = 0; i < particles; ++i)
        for (std::size_t k = 0; k < n; ++k)
          coords[i * n + k] = g->mean[k] + std::sqrt(g->variance[k]) * counter_normal(seed, kInitialStream, i, k);
    } else {
      const auto& s = std::get<EmpiricalLaw>(kind_).sample;
      if (s.size() == particles) return s;
      for (std::size_t i = 0; i < particles; ++i) {
        const std::size_t src = hash_key(seed, kBootstrapStream, i) % s.size();
        for (std::size_t k = 0; k < n; ++k) coords[i * n + k] = s.coord(src, k);
      }
    }
    return ParticleMeasure(n, std::move(coords));
  }

 private:
  Kind kind_;
};

}  // namespace mfg
