#pragma once

#include <map>
#include <string>
#include <vector>

#include "anl/fluid.hpp"
#include "anl/geometry.hpp"
#include "anl/initdata.hpp"

// Assembly of the null forms and inhomogeneous terms of the wave-transport
// reformulation, the residuals of its nine equations, the kinematic/dynamic
// identity suite, and grid-refinement studies.

namespace anl {

// Pointwise values entering the inhomogeneous terms.
struct PointVals {
  double u[4], ul[4];        // four-velocity, upper / lower
  double S[4], Sl[4];        // entropy gradient, upper / lower
  double w[4], wl[4];        // vorticity, upper / lower
  double C[4];               // modified vorticity of the vorticity
  double Dcal;               // modified divergence of the entropy gradient
  ThermoEval T;
};

// First-derivative slots. Conventions: du[k][l] = d_l u^k (upper k),
// dS[l][d] = d_l S^d (upper d), dw[g][a] = d_g varpi^a (upper a),
// dHU[g][d] = d_g (H u_flat)_d.
struct PointDerivs {
  double dh[4], ds[4];
  double du[4][4], dul[4][4];
  double dS[4][4];
  double dw[4][4];
  double dHU[4][4];
};

// Sign-flip fault injection for single displayed coefficients.
enum class Fault {
  None,
  Lh_FlipQh,      // c^2 q_;h inside the L_(h) bracket
  Lh_FlipQs,      // c^2 q_;s S.S term of L_(h)
  Qu_FlipFirst,   // eta^{al}{div u dh - du dh} brace of Q_(u)
  Qu_FlipGradH,   // {1 + c^-1 c_;h} g^-1(dh, du^a) term of Q_(u)
};

// Evaluated inhomogeneous pieces of the nine equations at one point.
struct Forms {
  double Qh = 0, Lh = 0;
  double Qu[4]{}, Lu[4]{};
  double Ls = 0;
  double QD = 0, LD = 0;
  double QC[4]{}, LC[4]{};
};

// Standard null forms at a point: Qg = g^-1(dphi, dpsi) and the antisymmetric
// Q_{mu nu}.
struct NullFormPoint {
  double Qg = 0;
  Mat4<double> Qmn{};
};
NullFormPoint standard_null_forms(const Mat4<double>& g_inv, const Vec4<double>& dphi,
                                  const Vec4<double>& dpsi);

// All displayed Q_* and L_* terms, coefficient by coefficient.
Forms eval_forms(const PointVals& v, const PointDerivs& d, Fault fault = Fault::None);

// Point data extracted from a completed state.
void make_point_data(const ExtendedState& X, std::int64_t i, const ThermoEval& T,
                     PointVals& v, PointDerivs& d);

// Field-level evaluation of the Q/L sets (for tests and reports).
struct NullFormSet {
  ScalarField Qh, Lh;
  std::array<ScalarField, 4> Qu, Lu;
  ScalarField Ls;
  ScalarField QD, LD;
  std::array<ScalarField, 4> QC, LC;
};
NullFormSet assemble_inhomogeneous(const ExtendedState& X, Fault fault = Fault::None);

struct ResidualReport {
  struct Row {
    std::string equation;
    double l2 = 0, linf = 0;
  };
  std::vector<Row> rows;  // fixed order: the nine equations
  int n1 = 0, n2 = 0, n3 = 0;
  std::string mode, eos_tag;
  double linf(const std::string& eq) const;
};

// Names of the nine equations, in report order.
const std::vector<std::string>& equation_names();

struct FormulationResiduals {
  ResidualReport report;
  // per-component residual fields keyed e.g. "wave-u[2]"
  std::vector<std::pair<std::string, ScalarField>> fields;
};
FormulationResiduals formulation_residuals(const ExtendedState& X, Fault fault = Fault::None);

struct IdentityCase {
  std::string name;
  enum class Class { Kinematic, Dynamic } cls;
  double linf_abs = 0;   // max pointwise residual
  double linf_rel = 0;   // residual / (1 + sum of |terms|), max over points
  double l2 = 0;
};
std::vector<IdentityCase> identity_suite(const ExtendedState& X);

struct ConvergenceRow {
  std::string equation;
  std::vector<int> sizes;
  std::vector<double> linf;
  double fitted_order = 0;   // fd4 mode: slope of log(res) against log(1/n)
  double decay_factor = 0;   // first/last
  bool floor = false;        // at numerical floor on every grid
};
std::vector<ConvergenceRow> convergence_study(const InitialDataRecipe& recipe,
                                              const EosParams& eos,
                                              const HyperbolicityRegion& region,
                                              const std::vector<int>& sizes, DerivMode mode,
                                              Fault fault = Fault::None);

// Covariant wave operator of a scalar with closure-supplied time derivatives:
// divergence form c^3 d_k (c^-3 (g^-1)^{kl} d_l phi) and the first-order
// expansion valid along solutions; their difference must vanish under
// refinement for closure-consistent states.
struct BoxGResult {
  ScalarField divergence_form;
  ScalarField expansion_form;
  double max_discrepancy = 0;
};
BoxGResult box_g_scalar(const ExtendedState& X, const ScalarField& phi,
                        const ScalarField& dtphi, const ScalarField& dt2phi);

// Christoffel symbols of the acoustical metric, Gamma_a^g_b per point, with
// all metric derivatives supplied by the closure chain rule.
std::vector<Christoffel4> christoffel(const ExtendedState& X);

}  // namespace anl
