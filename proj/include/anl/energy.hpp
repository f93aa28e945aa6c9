#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anl/fluid.hpp"
#include "anl/solver.hpp"

// Energy machinery: the u-multiplier wave energy and its time identity, the
// transport energy and its identity, the alpha-weighted elliptic inner
// product and energy with a spatial inverse metric, the div-curl integral
// identity, empirical coercivity constants, and Sobolev regularity tracking.

namespace anl {

enum class TrackedScalar { H, U1, U2, U3 };
enum class TransportQuantity { S, Varpi, Dmod, Cmod };

// phi and its closure time derivative, optionally commuted with a spatial
// multi-index I (numeric derivatives of the base and of the closure field).
std::pair<ScalarField, ScalarField> tracked_scalar(const ExtendedState& X, TrackedScalar w,
                                                   const std::array<int, 3>& I = {0, 0, 0});
std::pair<ScalarField, ScalarField> transport_scalar(const ExtendedState& X,
                                                     TransportQuantity q, int component,
                                                     const std::array<int, 3>& I = {0, 0, 0});

// E_wave[phi] = int { u^0/2 [c^2 (dt phi)^2 + c^2 |D phi|^2
//                     + (1-c^2)(u^k d_k phi)^2]
//                     + c^2 (dt phi)(u^a d_a phi) + u^0 phi^2 } c^-3 dx.
double wave_energy(const ExtendedState& X, const ScalarField& phi, const ScalarField& dtphi);

// E_transport[phi] = int phi^2 dx.
double transport_energy(const ScalarField& phi);

struct EnergyIdentityDefect {
  double defect_abs = 0, defect_rel = 0;
  double energy_initial = 0, energy_final = 0;
};

// |E(t) - E(0) - time integral of the bulk terms| with composite Simpson over
// uniformly spaced snapshots.
EnergyIdentityDefect wave_energy_identity_defect(const std::vector<FluidState>& snapshots,
                                                 TrackedScalar w,
                                                 const std::array<int, 3>& I = {0, 0, 0});
EnergyIdentityDefect transport_energy_identity_defect(
    const std::vector<FluidState>& snapshots, TransportQuantity q, int component,
    const std::array<int, 3>& I = {0, 0, 0});

// Symmetric 3x3 field, sym6 component order.
using SpatialMetricField = std::array<ScalarField, 6>;
SpatialMetricField identity_metric_field(std::shared_ptr<const TorusGrid> grid);
SpatialMetricField ginv_field(const ExtendedState& X);
// Eigenvalue range over the grid.
std::pair<double, double> metric_eigenvalue_range(const SpatialMetricField& M);

// alpha-weighted inner product of (w, S) with itself and the squared elliptic
// energy; N >= 3. The curl-of-S top-order blocks are evaluated (they vanish
// identically for gradients) and included.
double elliptic_energy_sq(const std::array<ScalarField, 3>& w,
                          const std::array<ScalarField, 3>& S, const SpatialMetricField& M,
                          double alpha, int N);

// Integral div-curl identity defect (relative); perfect-derivative terms drop
// on the torus.
double divcurl_identity_defect(const std::array<ScalarField, 3>& V,
                               const SpatialMetricField& M);

struct EllipticEnergyReport {
  double alpha_star = 0;
  double C_upper = 0;  // E <= C * (H^N sums)
  double C_lower = 0;  // H^N sums <= C * E
  double lambda = 0, Lambda = 0;
  double energy = 0;
  int N = 3;
};

// Bisection for the largest alpha in (0,1] whose two-sided comparison
// constants stay under `cap` on the probe family (the state's (w,S) plus
// randomized same-magnitude variants). Throws std::runtime_error if no
// alpha > 1e-6 works.
EllipticEnergyReport coercivity_check(const ExtendedState& X, int N, std::uint64_t seed,
                                      int n_probes = 20, double cap = 1e6);

struct RegularityReport {
  std::vector<double> times;
  // keys: h_HN, u_HN, s_HN1, S_HN, varpi_HN
  std::map<std::string, std::vector<double>> norms;
  std::map<std::string, double> envelope_rate;  // fitted exponential rate per norm
  double max_envelope_rate = 0;
  bool super_exponential_flag = false;
};
RegularityReport regularity_report(const std::vector<FluidState>& snapshots, int N);

}  // namespace anl
