#pragma once

#include <utility>

#include "anl/eos.hpp"
#include "anl/tensor.hpp"

// Pointwise acoustical Lorentzian geometry: the metric pair, its
// determinant, the eta-orthogonal projector, the inverse spatial Riemannian
// metric on constant-time slices, and characteristic speeds. Field-level
// Christoffel symbols and the covariant wave operator live in structure.cpp
// next to their consumers, built on the same templated kernels.

namespace anl {

struct Metric4 {
  Mat4<double> a{};
  double operator()(int i, int j) const { return a[i][j]; }
};

struct SpatialInvMetric {
  Mat3<double> a{};
  double operator()(int i, int j) const { return a[i][j]; }
};

struct Christoffel4 {
  // gamma[alpha][gamma][beta] = Gamma_alpha^gamma_beta, symmetric in
  // (alpha, beta).
  std::array<Mat4<double>, 4> gamma{};
};

// Templated metric kernels; c2 is the squared sound speed, u the
// four-velocity with upper indices.
template <class T>
Mat4<T> acoustical_metric(const T& c2, const Vec4<T>& u) {
  const T ic2 = 1.0 / c2;
  Mat4<T> g;
  const Vec4<T> ul = lower(u);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      g[i][j] = (ic2 - 1.0) * ul[i] * ul[j];
      if (i == j) g[i][j] = g[i][j] + eta_diag(i) * ic2;
    }
  return g;
}

template <class T>
Mat4<T> acoustical_inverse_metric(const T& c2, const Vec4<T>& u) {
  Mat4<T> gi;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      gi[i][j] = (c2 - 1.0) * u[i] * u[j];
      if (i == j) gi[i][j] = gi[i][j] + eta_diag(i) * c2;
    }
  return gi;
}

// Public double-typed operations with contract checks.

// g and g^{-1} from c^-2 eta + (c^-2-1) u u and c^2 eta^-1 + (c^2-1) u u.
// Requires u.u = -1 within 1e-10 and c in (0,1].
std::pair<Metric4, Metric4> acoustical_metric_pair(const ThermoEval& thermo,
                                                   const Vec4<double>& u);

// det g = -c^-6 from the closed formula, cross-checked against the numeric
// 4x4 determinant (rest-frame metric) to 1e-10 relative.
double det_g(const ThermoEval& thermo);

// Pi^{ab} = eta^{ab} + u^a u^b, the projector onto the eta-orthogonal
// complement of u.
Mat4<double> projector(const Vec4<double>& u);

// (G^{-1})^{ij} = delta^{ij} - u^i u^j / (u^0)^2 on a constant-time slice.
SpatialInvMetric spatial_metric_G(const Vec4<double>& u);
// Eigenvalue bounds (lambda, Lambda) of a spatial inverse metric.
std::pair<double, double> eigenvalue_bounds(const SpatialInvMetric& m);

struct CflSpeeds {
  double sound_cone;  // max over unit spatial covectors of the cone's
                      // coordinate speed
  double transport;   // max_i |u^i / u^0|
  double max;
};
// Characteristic coordinate speeds from the null-covector quadratic
// (g^{-1})^{00} l^2 + 2 (g^{-1})^{0i} xi_i l + (g^{-1})^{ij} xi_i xi_j = 0.
CflSpeeds cfl_speed(const ThermoEval& thermo, const Vec4<double>& u);

// Larger |root| of the cone quadratic in a given unit direction xi.
double cone_speed_in_direction(const Mat4<double>& g_inv, const std::array<double, 3>& xi);

}  // namespace anl
