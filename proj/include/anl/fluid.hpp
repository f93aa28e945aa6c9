#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "anl/eos.hpp"
#include "anl/grid.hpp"

// State completion and the analytic time-derivative closure. The fundamental
// unknowns are (h, s, u^1, u^2, u^3); u^0 is always recomputed from the
// normalization u.u = -1, never evolved. All time derivatives (including
// those of derived fields) come from the first-order system: the first level
// is a pointwise 6x6 solve, higher levels differentiate the system in time,
// and mixed derivatives are spatial derivatives of the closure fields. As a
// result every residual downstream is limited only by the spatial
// discretization.

namespace anl {

struct FluidState {
  std::shared_ptr<const TorusGrid> grid;
  EosParams eos;
  HyperbolicityRegion region;
  double time = 0.0;
  ScalarField h, s;
  std::array<ScalarField, 3> u;  // u^1..u^3

  static FluidState constant(std::shared_ptr<const TorusGrid> grid, const EosParams& eos,
                             double h0, double s0,
                             std::array<double, 3> u0 = {0.0, 0.0, 0.0});
};

class RegionExitError : public std::runtime_error {
 public:
  RegionExitError(std::string msg, std::vector<std::int64_t> points)
      : std::runtime_error(std::move(msg)), offending_points(std::move(points)) {}
  std::vector<std::int64_t> offending_points;
};

// First-level closure only: d/dt of (h, s, u^a) from the 6x6 system. This is
// the solver's right-hand side.
struct ClosureRhs {
  ScalarField Th, Ts;
  std::array<ScalarField, 3> Tu;
};
ClosureRhs closure_rhs(const FluidState& raw);

// Symmetric-pair index for second spatial derivatives:
// (11,12,13,22,23,33) -> 0..5.
inline int sym6(int a, int b) {
  static constexpr int tab[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return tab[a][b];
}

struct ExtendedState {
  FluidState base;

  // Numeric spatial derivatives of the fundamentals. Du[b][a] = d_a u^b.
  std::array<ScalarField, 3> Dh, Ds;
  std::array<std::array<ScalarField, 3>, 3> Du;
  std::array<ScalarField, 6> DDh, DDs;
  std::array<std::array<ScalarField, 6>, 3> DDu;

  // Closure time derivatives and their numeric spatial derivatives.
  ScalarField Th, Ts;
  std::array<ScalarField, 3> Tu;
  std::array<ScalarField, 3> DTh, DTs;
  std::array<std::array<ScalarField, 3>, 3> DTu;
  std::array<ScalarField, 6> DDTh, DDTs;
  std::array<std::array<ScalarField, 6>, 3> DDTu;
  ScalarField T2h, T2s;
  std::array<ScalarField, 3> T2u;
  std::array<ScalarField, 3> DT2h, DT2s;
  std::array<std::array<ScalarField, 3>, 3> DT2u;
  ScalarField T3h, T3s;
  std::array<ScalarField, 3> T3u;

  // Derived fields. HU is the lowered one-form H u_flat; varpi and Cmod carry
  // upper indices. Spatial derivatives of derived fields are numeric; their
  // time derivatives are analytic.
  ScalarField u0;
  std::array<ScalarField, 4> HU, THU, T2HU;
  std::array<std::array<ScalarField, 3>, 4> DHU, DTHU, DT2HU;
  std::array<ScalarField, 4> varpi, Tvarpi;
  std::array<std::array<ScalarField, 3>, 4> Dvarpi, DTvarpi;
  std::array<ScalarField, 4> Cmod;
  std::array<std::array<ScalarField, 3>, 4> DCmod;
  ScalarField Dcal;
  std::array<ScalarField, 3> DDcal;

  // Entropy gradient views: S_a = Ds[a], S_0 = Ts (they coincide with the
  // closure by construction).
  const ScalarField& S_lower(int alpha) const { return alpha == 0 ? Ts : Ds[alpha - 1]; }

  // Diagnostics recorded during the build.
  double max_constraint_defect = 0.0;  // max |u.u + 1|
  double max_varpi_u_defect = 0.0;     // max |varpi^k u_k| / scale
  double max_closure_u0_defect = 0.0;  // 6x6-solved dt u^0 vs chain rule
};

// Completes a raw state: derivative fields, closure to third order, derived
// fields (u^0, S, varpi, C, D). Throws RegionExitError when (h,s,u) leaves
// the declared hyperbolicity box.
ExtendedState complete_state(const FluidState& raw);

// u-orthogonal vorticity of a one-form V (lower components):
// vort^a(V) = -eps^{abcd} u_b d_c V_d. Spatial derivatives of V are numeric;
// dV_dt must be supplied (closure) or the call fails.
std::array<ScalarField, 4> vort_operator(const ExtendedState& state,
                                         const std::array<ScalarField, 4>& V_lower,
                                         const std::array<ScalarField, 4>* dtV_lower);

// Checks (h,s,u) against the region box; returns offending flat indices
// (empty when contained).
std::vector<std::int64_t> region_violations(const FluidState& raw);

}  // namespace anl
