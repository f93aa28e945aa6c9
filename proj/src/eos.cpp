#include "anl/eos.hpp"

#include <algorithm>
#include <stdexcept>

namespace anl {

EosParams EosParams::constant_c(double c0, Polynomial A, Polynomial B) {
  EosParams p;
  p.tag = "constant-c";
  p.c0 = c0;
  p.eps = 0.0;
  p.A = std::move(A);
  p.B = std::move(B);
  return p;
}

EosParams EosParams::variable_c(double c0, double eps, Polynomial A, Polynomial B) {
  EosParams p;
  p.tag = "variable-c";
  p.c0 = c0;
  p.eps = eps;
  p.A = std::move(A);
  p.B = std::move(B);
  return p;
}

ThermoEval eval_thermo(const EosParams& params, double h, double s) {
  if (params.bar_H <= 0.0) throw std::domain_error("eval_thermo: barH must be positive");

  // Order-2 (h,s) jets give every partial the evaluator needs, exactly.
  const J22 hj = seed_h2(h);
  const J22 sj = seed_s2(s);

  const J22 nj = params.n0(hj, sj);
  if (nj.v.v <= 0.0) throw std::domain_error("eval_thermo: n0 <= 0 at (h,s)");
  const J22 c2j = params.csq(hj, sj);
  if (c2j.v.v <= 0.0) throw std::domain_error("eval_thermo: c^2 <= 0 at (h,s)");

  const J22 cj = sqrt(c2j);
  const J22 thj = params.theta_fn(hj, sj);
  const J22 qj = params.q_fn(hj, sj);
  const J22 pj = params.pressure(hj, sj);

  ThermoEval out;
  out.c = cj.v.v;
  out.c_h = cj.dh.v;
  out.c_s = cj.ds.v;
  out.q = qj.v.v;
  out.q_h = qj.dh.v;
  out.q_s = qj.ds.v;
  out.theta = thj.v.v;
  out.theta_h = thj.dh.v;
  out.theta_s = thj.ds.v;
  out.theta_hh = thj.dh.dh;
  out.theta_hs = thj.dh.ds;
  out.n = nj.v.v;
  out.n_h = nj.dh.v;
  out.n_s = nj.ds.v;
  out.H = params.bar_H * std::exp(h);
  out.p = pj.v.v;
  out.rho = out.n * out.H - out.p;
  return out;
}

HyperbolicityRegion::SpeedBounds HyperbolicityRegion::speed_bounds(const EosParams& eos,
                                                                   int samples_per_axis) const {
  SpeedBounds b{1e300, -1e300, true};
  const int m = std::max(2, samples_per_axis);
  for (int i = 0; i < m; ++i) {
    const double h = h_min + (h_max - h_min) * i / (m - 1);
    for (int j = 0; j < m; ++j) {
      const double s = s_min + (s_max - s_min) * j / (m - 1);
      const ThermoEval t = eval_thermo(eos, h, s);
      b.c_min = std::min(b.c_min, t.c);
      b.c_max = std::max(b.c_max, t.c);
    }
  }
  b.hyperbolic = b.c_min > 0.0 && b.c_max <= 1.0 + 1e-12;
  return b;
}

ThermoValidation validate_thermo(const EosParams& params,
                                 const std::vector<std::pair<double, double>>& samples,
                                 double tolerance) {
  ThermoValidation v{0, 0, 0, 0, 0, tolerance, true};
  auto rel = [](double defect, double scale) {
    return std::abs(defect) / std::max(1.0, std::abs(scale));
  };
  for (auto [h, s] : samples) {
    const ThermoEval t = eval_thermo(params, h, s);
    // dp/dh, dp/ds from the pressure's own exact jet, against the laws they
    // must reproduce. A corrupted B'(s) shows up in theta but not in dp/ds.
    const J22 pj = params.pressure(seed_h2(h), seed_s2(s));
    v.max_defect_dp_dh = std::max(v.max_defect_dp_dh, rel(pj.dh.v - t.n * t.H, t.n * t.H));
    v.max_defect_dp_ds =
        std::max(v.max_defect_dp_ds, rel(pj.ds.v + t.n * t.theta, t.n * t.H));
    v.max_defect_rho = std::max(v.max_defect_rho, rel(t.rho + t.p - t.n * t.H, t.n * t.H));
    v.max_defect_csq = std::max(v.max_defect_csq, rel(t.c * t.c - t.n / t.n_h, 1.0));
    v.max_defect_q = std::max(v.max_defect_q, rel(t.q - t.theta / t.H, 1.0));
  }
  v.ok = v.max_defect_dp_dh <= tolerance && v.max_defect_dp_ds <= tolerance &&
         v.max_defect_rho <= tolerance && v.max_defect_csq <= tolerance &&
         v.max_defect_q <= tolerance;
  return v;
}

}  // namespace anl
