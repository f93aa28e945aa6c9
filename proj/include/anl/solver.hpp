#pragma once

#include <optional>
#include <vector>

#include "anl/fluid.hpp"
#include "anl/geometry.hpp"
#include "anl/initdata.hpp"

// Classical RK4 evolution of the first-order system with spectral space
// derivatives, restricted to smooth small-amplitude regimes. u^0 is
// recomputed algebraically at every stage; an optional diagnostic mode
// integrates u^0 passively to monitor how well the normalization constraint
// is preserved by the integrator.

namespace anl {

struct EvolutionConfig {
  std::shared_ptr<const TorusGrid> grid;
  EosParams eos;
  HyperbolicityRegion region;
  InitialDataRecipe recipe;
  double final_time = 0.5;
  double cfl = 0.5;         // in (0,1)
  double fixed_dt = 0.0;    // when > 0 use this step (still CFL-checked)
  bool evolve_u0_diagnostic = false;
  int snapshot_every = 0;   // keep a snapshot every k accepted steps (0: ends only)
};

struct TrajectoryRecord {
  std::vector<double> times;            // accepted step times
  std::vector<double> cfl_speed_max;    // grid max of the characteristic speed
  std::vector<double> constraint_drift; // max |u.u + 1| with the evolved u^0
  double max_constraint_drift = 0.0;
};

struct Trajectory {
  std::vector<FluidState> snapshots;  // uniformly spaced when snapshot_every > 0
  double snapshot_dt = 0.0;
  TrajectoryRecord record;
};

// Right-hand side of the evolution; shares the closure implementation, so it
// agrees with complete_state's first-level time derivatives bitwise.
ClosureRhs rhs(const FluidState& raw);

// Grid maximum of the characteristic coordinate speed (sound cone and
// transport).
double max_characteristic_speed(const FluidState& raw);

Trajectory evolve(const EvolutionConfig& config);

// Convenience: final state only.
FluidState evolve_final(const EvolutionConfig& config);

}  // namespace anl
