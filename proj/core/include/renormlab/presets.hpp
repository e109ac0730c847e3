#pragma once

#include <string>
#include <vector>

#include "renormlab/grid.hpp"

namespace renormlab {

/// Named coefficient fields used by configs, tests and the acceptance suite.
///
/// Drifts: zero, constant, trig, rotation (2-D cellular, divergence-free), step (square wave
/// a sign(sin x) e_1), pulsed (a (1 + cos(2 pi t / T) / 2) sin x e_1).
/// Diffusions: zero (no Wiener components), unit (sigma^k = a e_k), trig (Div sigma != 0),
/// rotation (one divergence-free component in 2-D; constant in 1-D).
/// Scalars: zero, one, bump (centered, radius L/8), cos, wave (bump times (1 + cos 3x / 2)),
/// positive (1 + cos x cos y / 2, a smooth density bounded away from zero).
TimeGridVector drift_preset(const std::string& name, const Grid& grid, double T, double amplitude = 1.0);
std::vector<TimeGridVector> diffusion_preset(const std::string& name, const Grid& grid, double T,
                                             double amplitude = 1.0);
GridScalar scalar_preset(const std::string& name, const Grid& grid);

const std::vector<std::string>& drift_preset_names();
const std::vector<std::string>& diffusion_preset_names();
const std::vector<std::string>& scalar_preset_names();

}  // namespace renormlab
