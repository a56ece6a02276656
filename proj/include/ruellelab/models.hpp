#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ruellelab/potential.hpp"
#include "ruellelab/sft.hpp"

namespace ruellelab {

// Suspension semiflow data: base subshift, positive roof tau, potential f,
// metric parameter theta. The symbolic stand-in for the flow.
struct SuspensionModel {
  SymbolicSystem system;
  RealFn roof;
  RealFn potential;
  double theta;
  std::string label;
  std::vector<std::string> warnings;
};

// Validates invariants (min roof > 0, theta in (0,1), matching systems) and
// attaches the two-valued-roof warning where it applies.
SuspensionModel make_model(SymbolicSystem system, RealFn roof, RealFn potential, double theta,
                           std::string label);

double min_roof(const SuspensionModel& m);
double max_roof(const SuspensionModel& m);

// Named presets: full2-const, full2-lattice, full2-nonlattice,
// golden-mean-const. "random" requires random_model instead.
SuspensionModel preset(const std::string& name);

std::vector<std::string> preset_names();

// Deterministic random model: irreducible transition matrix, roof
// 1 + sum of depth-d perturbations with amplitude variation_decay^d
// (rescaled so the roof stays >= 0.1), potential built the same way.
SuspensionModel random_model(std::uint64_t seed, int k0, int roof_depth, double variation_decay);

}  // namespace ruellelab
