#pragma once

#include <string>

#include "mfg/hamiltonian.hpp"
#include "mfg/measure.hpp"
#include "mfg/spectral_core.hpp"

namespace mfg {

/// Data of the coupled system: generator, Hamiltonian, terminal coupling G,
/// initial law and horizon.
struct MFGProblem {
  std::string name;
  SpectrumSpec spectrum;
  HamiltonianSpec hamiltonian;
  MeasureCoupling terminal;
  InitialLaw m0;
  double horizon = 1.0;
};

}  // namespace mfg
