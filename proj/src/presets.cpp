#include "presets.hpp"

namespace cdiff {

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = {
      {"backward-forward-duality", R"(scenario: backward-forward-duality
pipeline: backward-forward-duality
description: Ito-velocity regression, osmotic identity and forward/backward Kolmogorov duality on stationary OU
alpha: {magnitude: 1.0, phase: 0.0, gamma: 0.0}
particle: {mass: 1.0}
grid: {topology: line, lower: -6.0, upper: 6.0, cells: 480}
state: {name: harmonic-ground, omega: 1.0}
evolution: {time: 0.5}
ensemble: {paths: 100000, steps: 10, dt: 0.01, seed: 42}
histogram: {lower: -1.5, upper: 1.5, cells: 12}
)"},
      {"free-packet-spreading", R"(scenario: free-packet-spreading
pipeline: free-packet-spreading
description: Crank-Nicolson spreading laws, unitarity and catalog residual orders
particle: {mass: 1.0}
grid: {topology: line, lower: -30.0, upper: 30.0, cells: 3000, dt: 0.001}
state: {name: free-gaussian-packet, sigma: 1.0}
evolution: {time: 1.0}
refinement: {cells: 100}
)"},
      {"hamilton-jacobi", R"(scenario: hamilton-jacobi
pipeline: hamilton-jacobi
description: Hamilton-Jacobi residual on OU, convergence on a free packet, sign-flip detection
alpha: {magnitude: 1.0, phase: 0.0}
particle: {mass: 1.0}
grid: {topology: line, lower: -6.0, upper: 6.0, cells: 120}
state: {name: harmonic-ground, omega: 1.0, sigma: 1.0, momentum: 0.6, time: 0.4}
refinement: {cells: 100}
)"},
      {"kg-causality", R"(scenario: kg-causality
pipeline: kg-causality
description: relativistic packet, energy-momentum expectation and causality-violation curve
alpha: {magnitude: 1.0, phase: 1.5707963267948966}
particle: {mass: 1.0, dimension: 3}
ensemble: {paths: 20000, dt: 0.01, seed: 42}
relativistic:
  mass_squared_sign: 1
  windows: [0.1, 0.5, 1.5, 3.0]
  anchor: 0.5
  box: 96.0
  cells: 24
  packet_width: 12.0
  carrier: 5
  x0_lower: -8.0
  x0_upper: 12.0
  slices: 41
)"},
      {"noise-covariance-sweep", R"(scenario: noise-covariance-sweep
pipeline: noise-covariance-sweep
description: channel covariance, realizability sweep and quadratic-variation estimators
alpha: {magnitude: 1.0, gamma: 0.0}
particle: {mass: 1.0}
ensemble: {seed: 42}
noise:
  phases: [0.0, 1.5707963267948966, 0.7853981633974483]
  increments: 1000000
  step: 0.01
  sweep_phases: 100
  sweep_gammas: [0.0, 0.5]
  qv_increments: 100000
  qv_sizes: [1000, 4000, 16000, 64000]
  qv_replicates: 64
)"},
      {"ou-stationary", R"(scenario: ou-stationary
pipeline: ou-stationary
description: Brownian oscillator; stationary variance, Fokker-Planck oracle, forward/backward marginals
alpha: {magnitude: 1.0, phase: 0.0, gamma: 0.0}
particle: {mass: 1.0}
grid: {topology: line, lower: -6.0, upper: 6.0, cells: 240}
state: {name: harmonic-ground, omega: 1.0}
ensemble: {paths: 100000, steps: 500, dt: 0.01, seed: 42, drift_mode: density-consistent, snapshots: [2.5]}
histogram: {lower: -4.0, upper: 4.0, cells: 32}
)"},
      {"quantum-ho-ground", R"(scenario: quantum-ho-ground
pipeline: quantum-ho-ground
description: quantum oscillator ground state sampled with the density-consistent drift
alpha: {magnitude: 1.0, phase: 1.5707963267948966, gamma: 0.0}
particle: {mass: 1.0}
grid: {topology: line, lower: -6.0, upper: 6.0, cells: 240}
state: {name: harmonic-ground, omega: 1.0}
ensemble: {paths: 100000, steps: 500, dt: 0.01, seed: 42, drift_mode: density-consistent, snapshots: [1.0, 2.5]}
histogram: {lower: -4.0, upper: 4.0, cells: 32}
)"},
      {"ring-winding", R"(scenario: ring-winding
pipeline: ring-winding
description: winding quantization of ring eigenstates and a ring ensemble
alpha: {magnitude: 1.0, phase: 1.5707963267948966}
particle: {mass: 1.0}
grid: {topology: ring, lower: 0.0, upper: 6.283185307179586, cells: 128}
state: {name: ring-eigenstate, level: 1}
ensemble: {paths: 2000, steps: 1000, dt: 0.005, seed: 42}
histogram: {lower: 0.0, upper: 6.283185307179586, cells: 32}
ring: {max_winding: 3}
)"},
      {"uncertainty-family", R"(scenario: uncertainty-family
pipeline: uncertainty-family
description: position-momentum uncertainty products for Gaussians and random oscillator superpositions
alpha: {magnitude: 1.0, phase: 1.5707963267948966}
particle: {mass: 1.0}
grid: {topology: line, lower: -10.0, upper: 10.0, cells: 2000}
state: {name: free-gaussian-packet, sigma: 1.0, omega: 1.0}
uncertainty: {trials: 20, levels: 4, seed: 2024, report_phases: [0.3, -1.0]}
)"},
  };
  return presets;
}

}  // namespace cdiff
