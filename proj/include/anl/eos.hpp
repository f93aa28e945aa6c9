#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "anl/jets.hpp"

// Equation of state as closed-form functions of the logarithmic enthalpy h
// and the entropy s, generated from a number-density function n0(h,s) and a
// pressure integration constant B(s):
//
//   H   = barH * e^h
//   n   = n0(h,s) = e^{h/c0^2} (1 + eps*h) A(s)
//   p   = barH * A(s) * F(h) + B(s),  F(h) = int_0^h e^{h'/c0^2}(1+eps h')e^{h'} dh'
//   rho = n H - p
//   c^2 = n / (dn/dh)
//   theta = -(dp/ds)/n,   q = theta / H
//
// eps = 0 is the constant-c family; eps != 0 gives an h-dependent sound
// speed on a bounded h-range. The construction makes dH = dp/n + theta ds
// hold identically, which the residual harness relies on.

namespace anl {

struct Polynomial {
  std::vector<double> coeff;  // coeff[i] * s^i

  template <class T>
  T operator()(const T& s) const {
    T acc = s - s;
    for (size_t i = coeff.size(); i-- > 0;) acc = acc * s + coeff[i];
    return acc;
  }
  template <class T>
  T eval_derivative(const T& s) const {
    T acc = s - s;
    for (size_t i = coeff.size(); i-- > 1;) acc = acc * s + double(i) * coeff[i];
    return acc;
  }
  Polynomial derivative() const {
    Polynomial d;
    for (size_t i = 1; i < coeff.size(); ++i) d.coeff.push_back(double(i) * coeff[i]);
    if (d.coeff.empty()) d.coeff.push_back(0.0);
    return d;
  }
};

struct EosParams {
  std::string tag = "constant-c";
  double bar_H = 1.0;  // reference enthalpy, > 0
  double c0 = 1.0;     // sound speed scale, in (0,1]
  double eps = 0.0;    // variable-c strength
  Polynomial A{{1.0}};
  Polynomial B{{0.0}};
  // Fault-injection hook: replaces the analytic B'(s) so validate_thermo can
  // demonstrate detection of an inconsistent derivative supply.
  std::optional<Polynomial> Bprime_override;

  static EosParams constant_c(double c0, Polynomial A = {{1.0, 0.1}},
                              Polynomial B = {{0.0, 0.05, 0.02}});
  static EosParams variable_c(double c0, double eps, Polynomial A = {{1.0, 0.1}},
                              Polynomial B = {{0.0, 0.05, 0.02}});

  // Generating functions, templated so jets of any order evaluate the exact
  // closed-form derivatives.
  template <class T>
  T n0(const T& h, const T& s) const {
    return exp(h * (1.0 / (c0 * c0))) * (1.0 + eps * h) * A(s);
  }
  template <class T>
  T dn0_dh(const T& h, const T& s) const {
    const double ic2 = 1.0 / (c0 * c0);
    return exp(h * ic2) * ((1.0 + eps * h) * ic2 + eps) * A(s);
  }
  template <class T>
  T Fint(const T& h) const {
    const double g = 1.0 + 1.0 / (c0 * c0);
    T eg = exp(g * h);
    T base = (eg - 1.0) / g;
    if (eps == 0.0) return base;
    return base + (eps / (g * g)) * ((g * h - 1.0) * eg + 1.0);
  }
  template <class T>
  T pressure(const T& h, const T& s) const {
    return bar_H * A(s) * Fint(h) + B(s);
  }
  template <class T>
  T theta_fn(const T& h, const T& s) const {
    return -(bar_H * A.eval_derivative(s) * Fint(h) + dB(s)) / n0(h, s);
  }
  template <class T>
  T csq(const T& h, const T& s) const {
    return n0(h, s) / dn0_dh(h, s);
  }
  template <class T>
  T sound_speed(const T& h, const T& s) const {
    return sqrt(csq(h, s));
  }
  template <class T>
  T q_fn(const T& h, const T& s) const {
    return theta_fn(h, s) / (bar_H * exp(h));
  }
  template <class T>
  T enthalpy(const T& h) const {
    return bar_H * exp(h);
  }
  template <class T>
  T dB(const T& s) const {
    return Bprime_override ? (*Bprime_override)(s) : B.eval_derivative(s);
  }
};

struct ThermoEval {
  double c, c_h, c_s;
  double q, q_h, q_s;
  double theta, theta_h, theta_s, theta_hh, theta_hs;
  double n, n_h, n_s;
  double H, p, rho;
};

struct HyperbolicityRegion {
  double h_min = -0.5, h_max = 0.5;
  double s_min = -0.5, s_max = 0.5;
  double u_max = 0.5;  // per-component bound on |u^a|

  bool contains(double h, double s, double u1, double u2, double u3) const {
    return h >= h_min && h <= h_max && s >= s_min && s <= s_max &&
           std::abs(u1) <= u_max && std::abs(u2) <= u_max && std::abs(u3) <= u_max;
  }
  // Smallest and largest sound speed over the closure of the (h,s) box.
  struct SpeedBounds {
    double c_min, c_max;
    bool hyperbolic;  // 0 < c_min and c_max <= 1 (+ roundoff slack)
  };
  SpeedBounds speed_bounds(const EosParams& eos, int samples_per_axis = 33) const;
};

// Pointwise thermodynamic package with exact analytic partials.
// Throws std::domain_error if n0 <= 0 or c^2 <= 0 at (h,s).
ThermoEval eval_thermo(const EosParams& params, double h, double s);

struct ThermoValidation {
  double max_defect_dp_dh;  // dp/dh = n H
  double max_defect_dp_ds;  // dp/ds = -n theta
  double max_defect_rho;    // rho + p = n H
  double max_defect_csq;    // c^2 = n / (dn/dh)
  double max_defect_q;      // q = theta / H
  double tolerance;
  bool ok;
};

// Cross-checks the closed-form derivatives against central finite
// differences (step 1e-5) and the algebraic identities of the construction.
ThermoValidation validate_thermo(const EosParams& params,
                                 const std::vector<std::pair<double, double>>& samples,
                                 double tolerance = 1e-7);

}  // namespace anl
