#pragma once

// Hamiltonian interfaces. A Hamiltonian is consumed one measure at a time:
// freeze(mu) returns H(., ., mu) and H_p(., ., mu) as plain callables.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfg/measure.hpp"
#include "mfg/ou_kernel.hpp"

namespace mfg {

struct FrozenHamiltonian {
  std::function<double(std::span<const double> x, std::span<const double> p)> value;
  std::function<void(std::span<const double> x, std::span<const double> p, std::span<double> out)> gradient_p;
};

/// A scalar coupling x -> F(x, mu) (running coupling F or terminal G).
struct MeasureCoupling {
  std::string name;
  std::function<ScalarFn(const ParticleMeasure&)> freeze;
  double sup_bound = 0.0;        // declared |F|_inf
  double lipschitz_measure = 0.0;  // declared C with |F(x,mu) - F(x,nu)| <= C d_1(mu, nu)
  bool measure_dependent = true;

  static MeasureCoupling constant(double c) {
    return {"constant", [c](const ParticleMeasure&) -> ScalarFn { return [c](std::span<const double>) { return c; }; },
            std::abs(c), 0.0, false};
  }
  static MeasureCoupling from_function(std::string name, ScalarFn f, double sup_bound) {
    return {std::move(name), [f](const ParticleMeasure&) { return f; }, sup_bound, 0.0, false};
  }
};

/// H0(x, p) with its p-gradient, the measure-free part of a separated Hamiltonian.
struct ControlHamiltonian {
  std::string name;
  std::function<double(std::span<const double>, std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<const double>, std::span<double>)> gradient_p;
  double gradient_bound = 0.0;   // sup |H0_p|
  double lipschitz_p = 0.0;      // Lipschitz constant of H0 in p (= gradient_bound)
  double gradient_lipschitz = 0.0;  // Lipschitz constant of H0_p in p
};

struct HamiltonianSpec {
  std::string name;
  std::size_t modes = 1;
  std::function<FrozenHamiltonian(const ParticleMeasure&)> freeze;
  double hp_bound = 0.0;           // declared R >= sup |H_p|
  double lipschitz = 0.0;          // declared C for |H(x,p,mu) - H(x,p',mu')| <= C(|p-p'| + d_1(mu,mu'))
  double gradient_lipschitz = 0.0;  // same for H_p
  bool measure_dependent = true;
  /// Parts of the separated form H = H0 - F, when available.
  std::shared_ptr<const ControlHamiltonian> control;
  std::shared_ptr<const MeasureCoupling> coupling;

  bool separated() const { return control && coupling; }
};

/// H(x, p, mu) = H0(x, p) - F(x, mu).
inline HamiltonianSpec separated_hamiltonian(std::size_t modes, ControlHamiltonian h0, MeasureCoupling f) {
  auto c = std::make_shared<const ControlHamiltonian>(std::move(h0));
  auto cp = std::make_shared<const MeasureCoupling>(std::move(f));
  HamiltonianSpec spec;
  spec.name = c->name + " - " + cp->name;
  spec.modes = modes;
  spec.hp_bound = c->gradient_bound;
  spec.lipschitz = std::max(c->lipschitz_p, cp->lipschitz_measure);
  spec.gradient_lipschitz = c->gradient_lipschitz;
  spec.measure_dependent = cp->measure_dependent;
  spec.control = c;
  spec.coupling = cp;
  spec.freeze = [c, cp](const ParticleMeasure& mu) {
    ScalarFn fx = cp->freeze(mu);
    FrozenHamiltonian out;
    out.value = [c, fx](std::span<const double> x, std::span<const double> p) { return c->value(x, p) - fx(x); };
    out.gradient_p = c->gradient_p;
    return out;
  };
  return spec;
}

/// H(x, p, mu) = h0, measure and gradient free.
inline HamiltonianSpec constant_hamiltonian(std::size_t modes, double h0) {
  HamiltonianSpec spec;
  spec.name = "constant";
  spec.modes = modes;
  spec.measure_dependent = false;
  spec.freeze = [h0](const ParticleMeasure&) {
    FrozenHamiltonian out;
    out.value = [h0](std::span<const double>, std::span<const double>) { return h0; };
    out.gradient_p = [](std::span<const double>, std::span<const double>, std::span<double> g) {
      std::fill(g.begin(), g.end(), 0.0);
    };
    return out;
  };
  return spec;
}

}  // namespace mfg
