#include "anl/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anl/state_point.hpp"
#include "anl/structure.hpp"

namespace anl {

namespace {

ScalarField apply_multi_index(const ScalarField& f, const std::array<int, 3>& I) {
  ScalarField out = f;
  for (int axis = 0; axis < 3; ++axis)
    for (int k = 0; k < I[axis]; ++k) out = partial_derivative(out, axis + 1);
  return out;
}

std::vector<std::array<int, 3>> multi_indices(int order) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i <= order; ++i)
    for (int j = 0; j + i <= order; ++j) out.push_back({i, j, order - i - j});
  return out;
}

// Composite Simpson (3/8-hybrid when the interval count is odd), uniform h.
double integrate_time(const std::vector<double>& v, double h) {
  const int m = int(v.size()) - 1;
  if (m < 1) return 0.0;
  if (m == 1) return 0.5 * h * (v[0] + v[1]);
  double acc = 0.0;
  int upto = m;  // integrate [0, upto] with Simpson; leftover handled by 3/8
  if (m % 2 == 1) {
    if (m < 3) return 0.5 * h * (v[0] + v[1]);
    upto = m - 3;
  }
  for (int k = 0; k + 2 <= upto; k += 2)
    acc += h / 3.0 * (v[k] + 4.0 * v[k + 1] + v[k + 2]);
  if (m % 2 == 1)
    acc += 3.0 * h / 8.0 * (v[m - 3] + 3.0 * v[m - 2] + 3.0 * v[m - 1] + v[m]);
  return acc;
}

double rel_defect(double lhs_minus_rhs, double scale) {
  return std::abs(lhs_minus_rhs) / std::max(1e-30, std::abs(scale));
}

}  // namespace

std::pair<ScalarField, ScalarField> tracked_scalar(const ExtendedState& X, TrackedScalar w,
                                                   const std::array<int, 3>& I) {
  const ScalarField* base = nullptr;
  const ScalarField* dt = nullptr;
  switch (w) {
    case TrackedScalar::H:
      base = &X.base.h;
      dt = &X.Th;
      break;
    case TrackedScalar::U1:
      base = &X.base.u[0];
      dt = &X.Tu[0];
      break;
    case TrackedScalar::U2:
      base = &X.base.u[1];
      dt = &X.Tu[1];
      break;
    case TrackedScalar::U3:
      base = &X.base.u[2];
      dt = &X.Tu[2];
      break;
  }
  return {apply_multi_index(*base, I), apply_multi_index(*dt, I)};
}

std::pair<ScalarField, ScalarField> transport_scalar(const ExtendedState& X,
                                                     TransportQuantity q, int component,
                                                     const std::array<int, 3>& I) {
  auto g = X.base.grid;
  ScalarField phi(g), dtphi(g);
  const std::int64_t n = X.base.h.size();
  switch (q) {
    case TransportQuantity::S:
      for (std::int64_t i = 0; i < n; ++i) {
        phi[i] = component == 0 ? -X.Ts[i] : X.Ds[component - 1][i];
        dtphi[i] = component == 0 ? -X.T2s[i] : X.DTs[component - 1][i];
      }
      break;
    case TransportQuantity::Varpi:
      phi = X.varpi[component];
      dtphi = X.Tvarpi[component];
      break;
    case TransportQuantity::Dmod:
      phi = X.Dcal;
      for (std::int64_t i = 0; i < n; ++i) dtphi[i] = PointView(X, i).Dmod<1>().c[1];
      break;
    case TransportQuantity::Cmod:
      phi = X.Cmod[component];
      for (std::int64_t i = 0; i < n; ++i)
        dtphi[i] = PointView(X, i).Cmod<1>()[component].c[1];
      break;
  }
  return {apply_multi_index(phi, I), apply_multi_index(dtphi, I)};
}

double wave_energy(const ExtendedState& X, const ScalarField& phi, const ScalarField& dtphi) {
  std::array<ScalarField, 3> Dphi{partial_derivative(phi, 1), partial_derivative(phi, 2),
                                  partial_derivative(phi, 3)};
  const std::int64_t n = phi.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double c2 = X.base.eos.csq(X.base.h[i], X.base.s[i]);
    const double c = std::sqrt(c2);
    const double u0 = X.u0[i];
    double grad2 = 0.0, udphi = u0 * dtphi[i], uDa = 0.0;
    for (int a = 0; a < 3; ++a) {
      grad2 += Dphi[a][i] * Dphi[a][i];
      udphi += X.base.u[a][i] * Dphi[a][i];
      uDa += X.base.u[a][i] * Dphi[a][i];
    }
    const double density =
        0.5 * u0 * (c2 * dtphi[i] * dtphi[i] + c2 * grad2 + (1.0 - c2) * udphi * udphi) +
        c2 * dtphi[i] * uDa + u0 * phi[i] * phi[i];
    acc += density / (c * c * c);
  }
  return acc * (phi.grid().volume() / double(n));
}

double transport_energy(const ScalarField& phi) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < phi.size(); ++i) acc += phi[i] * phi[i];
  return acc * (phi.grid().volume() / double(phi.size()));
}

namespace {

// Bulk integrand of the wave-energy identity at one snapshot.
double wave_bulk_integral(const ExtendedState& X, const ScalarField& phi,
                          const ScalarField& dtphi, const ScalarField& dt2phi) {
  const BoxGResult box = box_g_scalar(X, phi, dtphi, dt2phi);
  std::array<ScalarField, 3> Dphi{partial_derivative(phi, 1), partial_derivative(phi, 2),
                                  partial_derivative(phi, 3)};
  const std::int64_t n = phi.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const double c2 = T.c * T.c, ic2 = 1.0 / c2;

    Vec4<double> dphi{dtphi[i], Dphi[0][i], Dphi[1][i], Dphi[2][i]};
    const Vec4<double> u{v.u[0], v.u[1], v.u[2], v.u[3]};
    const Mat4<double> gi = acoustical_inverse_metric(c2, u);
    const Mat4<double> gl = acoustical_metric(c2, u);

    double gdpdp = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) gdpdp += gi[a][b] * dphi[a] * dphi[b];
    Mat4<double> Tab;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        Tab[a][b] = dphi[a] * dphi[b] - 0.5 * gl[a][b] * gdpdp;

    // d_l g_{mn} via the chain rule, as in the Christoffel assembly.
    double dic2[4];
    for (int l = 0; l < 4; ++l)
      dic2[l] = -2.0 / (c2 * T.c) * (T.c_h * d.dh[l] + T.c_s * d.ds[l]);
    double dg[4][4][4];
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m)
        for (int nn = 0; nn < 4; ++nn) {
          const double eta_mn = m == nn ? eta_diag(m) : 0.0;
          dg[l][m][nn] = dic2[l] * (eta_mn + v.ul[m] * v.ul[nn]) +
                         (ic2 - 1.0) * (d.dul[m][l] * v.ul[nn] + v.ul[m] * d.dul[nn][l]);
        }

    double udphi = 0.0, divu = 0.0;
    for (int k = 0; k < 4; ++k) {
      udphi += v.u[k] * dphi[k];
      divu += d.du[k][k];
    }

    // -(box phi)(u^k d_k phi)
    double integrand = -box.expansion_form[i] * udphi;

    // -1/2 (g^-1)(g^-1) T u.dg
    double g2 = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int g_ = 0; g_ < 4; ++g_)
        for (int b = 0; b < 4; ++b)
          for (int dd = 0; dd < 4; ++dd) {
            double udg = 0.0;
            for (int k = 0; k < 4; ++k) udg += v.u[k] * dg[k][g_][dd];
            g2 += gi[a][g_] * gi[b][dd] * Tab[a][b] * udg;
          }
    integrand -= 0.5 * g2;

    // -(g^-1)^{b d} T_{a b} d_d u^a
    double g3 = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int dd = 0; dd < 4; ++dd) g3 += gi[b][dd] * Tab[a][b] * d.du[a][dd];
    integrand -= g3;

    // + (div u + Gamma^k_{k l} u^l) phi^2 + 2 phi u^k d_k phi
    double gamma_trace_u = 0.0;
    for (int l = 0; l < 4; ++l) {
      double tr = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int dd = 0; dd < 4; ++dd) tr += gi[k][dd] * dg[l][dd][k];
      gamma_trace_u += 0.5 * tr * v.u[l];
    }
    integrand += (divu + gamma_trace_u) * phi[i] * phi[i] + 2.0 * phi[i] * udphi;

    acc += integrand / (c2 * T.c);  // d mu_g = c^-3 dx dt
  }
  return acc * (phi.grid().volume() / double(n));
}

}  // namespace

EnergyIdentityDefect wave_energy_identity_defect(const std::vector<FluidState>& snapshots,
                                                 TrackedScalar w,
                                                 const std::array<int, 3>& I) {
  if (snapshots.size() < 3)
    throw std::invalid_argument("wave_energy_identity_defect: need >= 3 snapshots");
  const double h = snapshots[1].time - snapshots[0].time;
  for (size_t k = 1; k < snapshots.size(); ++k)
    if (std::abs(snapshots[k].time - snapshots[k - 1].time - h) > 1e-9 * std::max(1.0, h))
      throw std::invalid_argument(
          "wave_energy_identity_defect: snapshots must be uniformly spaced");

  std::vector<double> bulk;
  double E0 = 0, E1 = 0;
  for (size_t k = 0; k < snapshots.size(); ++k) {
    ExtendedState X = complete_state(snapshots[k]);
    auto [phi, dtphi] = tracked_scalar(X, w, I);
    ScalarField dt2phi(X.base.grid);
    {
      const ScalarField* t2 = nullptr;
      switch (w) {
        case TrackedScalar::H: t2 = &X.T2h; break;
        case TrackedScalar::U1: t2 = &X.T2u[0]; break;
        case TrackedScalar::U2: t2 = &X.T2u[1]; break;
        case TrackedScalar::U3: t2 = &X.T2u[2]; break;
      }
      dt2phi = apply_multi_index(*t2, I);
    }
    const double E = wave_energy(X, phi, dtphi);
    if (k == 0) E0 = E;
    if (k + 1 == snapshots.size()) E1 = E;
    bulk.push_back(wave_bulk_integral(X, phi, dtphi, dt2phi));
  }
  EnergyIdentityDefect out;
  out.energy_initial = E0;
  out.energy_final = E1;
  const double rhs = E0 + integrate_time(bulk, h);
  out.defect_abs = std::abs(E1 - rhs);
  out.defect_rel = rel_defect(E1 - rhs, std::max(std::abs(E0), std::abs(E1)));
  return out;
}

EnergyIdentityDefect transport_energy_identity_defect(
    const std::vector<FluidState>& snapshots, TransportQuantity q, int component,
    const std::array<int, 3>& I) {
  if (snapshots.size() < 3)
    throw std::invalid_argument("transport_energy_identity_defect: need >= 3 snapshots");
  const double h = snapshots[1].time - snapshots[0].time;
  for (size_t k = 1; k < snapshots.size(); ++k)
    if (std::abs(snapshots[k].time - snapshots[k - 1].time - h) > 1e-9 * std::max(1.0, h))
      throw std::invalid_argument(
          "transport_energy_identity_defect: snapshots must be uniformly spaced");
  std::vector<double> bulk;
  double E0 = 0, E1 = 0;
  for (size_t k = 0; k < snapshots.size(); ++k) {
    ExtendedState X = complete_state(snapshots[k]);
    auto [phi, dtphi] = transport_scalar(X, q, component, I);
    std::array<ScalarField, 3> Dphi{partial_derivative(phi, 1), partial_derivative(phi, 2),
                                    partial_derivative(phi, 3)};
    // beta^a = u^a / u^0 and its numeric divergence
    ScalarField beta[3] = {ScalarField(X.base.grid), ScalarField(X.base.grid),
                           ScalarField(X.base.grid)};
    const std::int64_t n = phi.size();
    for (std::int64_t i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a) beta[a][i] = X.base.u[a][i] / X.u0[i];
    ScalarField divbeta(X.base.grid);
    for (int a = 0; a < 3; ++a) {
      ScalarField d = partial_derivative(beta[a], a + 1);
      for (std::int64_t i = 0; i < n; ++i) divbeta[i] += d[i];
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      double udphi = X.u0[i] * dtphi[i];
      for (int a = 0; a < 3; ++a) udphi += X.base.u[a][i] * Dphi[a][i];
      acc += divbeta[i] * phi[i] * phi[i] + 2.0 * phi[i] * udphi / X.u0[i];
    }
    bulk.push_back(acc * (phi.grid().volume() / double(n)));
    const double E = transport_energy(phi);
    if (k == 0) E0 = E;
    if (k + 1 == snapshots.size()) E1 = E;
  }
  EnergyIdentityDefect out;
  out.energy_initial = E0;
  out.energy_final = E1;
  const double rhs = E0 + integrate_time(bulk, h);
  out.defect_abs = std::abs(E1 - rhs);
  out.defect_rel = rel_defect(E1 - rhs, std::max(std::abs(E0), std::abs(E1)));
  return out;
}

SpatialMetricField identity_metric_field(std::shared_ptr<const TorusGrid> grid) {
  SpatialMetricField M;
  for (int k = 0; k < 6; ++k) M[k] = ScalarField(grid);
  for (int a = 0; a < 3; ++a) {
    ScalarField& diag = M[sym6(a, a)];
    for (std::int64_t i = 0; i < diag.size(); ++i) diag[i] = 1.0;
  }
  return M;
}

SpatialMetricField ginv_field(const ExtendedState& X) {
  SpatialMetricField M;
  for (int k = 0; k < 6; ++k) M[k] = ScalarField(X.base.grid);
  const std::int64_t n = X.base.h.size();
  for (std::int64_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        M[sym6(a, b)][i] = (a == b ? 1.0 : 0.0) -
                           X.base.u[a][i] * X.base.u[b][i] / (X.u0[i] * X.u0[i]);
  return M;
}

std::pair<double, double> metric_eigenvalue_range(const SpatialMetricField& M) {
  double lo = 1e300, hi = -1e300;
  const std::int64_t n = M[0].size();
  for (std::int64_t i = 0; i < n; ++i) {
    SpatialInvMetric m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m.a[a][b] = M[sym6(a, b)][i];
    auto [l, L] = eigenvalue_bounds(m);
    lo = std::min(lo, l);
    hi = std::max(hi, L);
  }
  return {lo, hi};
}

double elliptic_energy_sq(const std::array<ScalarField, 3>& w,
                          const std::array<ScalarField, 3>& S, const SpatialMetricField& M,
                          double alpha, int N) {
  if (N < 3) throw std::invalid_argument("elliptic_energy_sq: N must be >= 3");
  auto grid = w[0].grid_ptr();
  const std::int64_t n = w[0].size();
  const double cellw = grid->volume() / double(n);

  double l2_sum = 0.0, top_sum = 0.0;
  for (int order = 0; order <= N - 1; ++order) {
    for (const auto& I : multi_indices(order)) {
      std::array<ScalarField, 3> wI, SI;
      for (int b = 0; b < 3; ++b) {
        wI[b] = apply_multi_index(w[b], I);
        SI[b] = apply_multi_index(S[b], I);
      }
      for (int b = 0; b < 3; ++b)
        for (std::int64_t i = 0; i < n; ++i)
          l2_sum += (wI[b][i] * wI[b][i] + SI[b][i] * SI[b][i]) * cellw;

      if (order != N - 1) continue;
      // Top order: M-divergence squares and the weighted curl-curl blocks.
      std::array<std::array<ScalarField, 3>, 3> dwI, dSI;  // [b][a] = d_a V_b
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          dwI[b][a] = partial_derivative(wI[b], a + 1);
          dSI[b][a] = partial_derivative(SI[b], a + 1);
        }
      for (std::int64_t i = 0; i < n; ++i) {
        double Mv[3][3];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) Mv[a][b] = M[sym6(a, b)][i];
        double divw = 0.0, divS = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            divw += Mv[a][b] * dwI[b][a][i];
            divS += Mv[a][b] * dSI[b][a][i];
          }
        double curlw[3], curlS[3];
        for (int c = 0; c < 3; ++c) {
          curlw[c] = 0.0;
          curlS[c] = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              const int e = eps3(c, a, b);
              if (e) {
                curlw[c] += double(e) * dwI[b][a][i];
                curlS[c] += double(e) * dSI[b][a][i];
              }
            }
        }
        double cc_w = 0.0, cc_S = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
              for (int dd = 0; dd < 3; ++dd)
                for (int ii = 0; ii < 3; ++ii)
                  for (int jj = 0; jj < 3; ++jj) {
                    const int e1 = eps3(a, c, ii), e2 = eps3(b, dd, jj);
                    if (e1 && e2) {
                      const double wgt = Mv[a][b] * Mv[c][dd] * double(e1 * e2);
                      cc_w += wgt * curlw[ii] * curlw[jj];
                      cc_S += wgt * curlS[ii] * curlS[jj];
                    }
                  }
        top_sum += (divw * divw + divS * divS + cc_w + cc_S) * cellw;
      }
    }
  }
  return alpha * top_sum + l2_sum;
}

double divcurl_identity_defect(const std::array<ScalarField, 3>& V,
                               const SpatialMetricField& M) {
  auto grid = V[0].grid_ptr();
  const std::int64_t n = V[0].size();
  const double cellw = grid->volume() / double(n);

  std::array<std::array<ScalarField, 3>, 3> dV;  // [b][a] = d_a V_b
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) dV[b][a] = partial_derivative(V[b], a + 1);
  std::array<std::array<ScalarField, 3>, 6> dM;  // [sym][e] = d_e M^{..}
  for (int k = 0; k < 6; ++k)
    for (int e = 0; e < 3; ++e) dM[k][e] = partial_derivative(M[k], e + 1);

  double lhs = 0.0, rhs = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double Mv[3][3], dMv[3][3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Mv[a][b] = M[sym6(a, b)][i];
        for (int e = 0; e < 3; ++e) dMv[a][b][e] = dM[sym6(a, b)][e][i];
      }
    auto dv = [&](int b, int a) { return dV[b][a][i]; };

    // LHS: (M:dV)^2 + 1/2 eps eps M M curl curl.
    double divM = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) divM += Mv[a][b] * dv(b, a);
    double curl[3];
    for (int c = 0; c < 3; ++c) {
      curl[c] = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int e = eps3(c, a, b);
          if (e) curl[c] += double(e) * dv(b, a);
        }
    }
    double cc = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int dd = 0; dd < 3; ++dd)
            for (int ii = 0; ii < 3; ++ii)
              for (int jj = 0; jj < 3; ++jj) {
                const int e1 = eps3(a, c, ii), e2 = eps3(b, dd, jj);
                if (e1 && e2) cc += Mv[a][b] * Mv[c][dd] * double(e1 * e2) * curl[ii] * curl[jj];
              }
    lhs += (divM * divM + 0.5 * cc) * cellw;

    // RHS: M M (d_a V_c)(d_b V_d) plus the commutator terms; the perfect
    // derivatives integrate to zero on the torus.
    double grad2 = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int dd = 0; dd < 3; ++dd)
            grad2 += Mv[a][b] * Mv[c][dd] * dv(c, a) * dv(dd, b);
    double comm = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int dd = 0; dd < 3; ++dd) {
            auto dMM = [&](int e) {
              return dMv[a][b][e] * Mv[c][dd] + Mv[a][b] * dMv[c][dd][e];
            };
            comm += 0.5 * dMM(a) * (V[c][i] * dv(dd, b) + V[c][i] * dv(b, dd));
            comm += 0.5 * dMM(c) * (V[a][i] * dv(dd, b) + V[a][i] * dv(b, dd));
            comm -= 0.5 * dMM(b) * (V[a][i] * dv(dd, c) + V[c][i] * dv(dd, a));
            comm -= 0.5 * dMM(dd) * (V[a][i] * dv(b, c) + V[c][i] * dv(b, a));
          }
    rhs += (grad2 + comm) * cellw;
  }
  return rel_defect(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
}

EllipticEnergyReport coercivity_check(const ExtendedState& X, int N, std::uint64_t seed,
                                      int n_probes, double cap) {
  auto grid = X.base.grid;
  const SpatialMetricField M = ginv_field(X);
  auto [lam, Lam] = metric_eigenvalue_range(M);

  // Probe family: the state's (w, S) plus randomized same-magnitude variants;
  // identically-zero probes are excluded.
  std::array<ScalarField, 3> w0{X.varpi[1], X.varpi[2], X.varpi[3]};
  std::array<ScalarField, 3> S0{X.Ds[0], X.Ds[1], X.Ds[2]};
  auto hn_sum = [&](const std::array<ScalarField, 3>& a, const std::array<ScalarField, 3>& b) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += sobolev_norm(a[k], N) + sobolev_norm(b[k], N);
    return s;
  };
  double scale0 = hn_sum(w0, S0);
  std::vector<std::pair<std::array<ScalarField, 3>, std::array<ScalarField, 3>>> probes;
  if (scale0 > 1e-14) probes.emplace_back(w0, S0);
  const double target = scale0 > 1e-14 ? scale0 : 1.0;

  std::uint64_t st = seed ^ 0x517cc1b727220a95ull;
  for (int p = 0; p < n_probes; ++p) {
    std::array<ScalarField, 3> wp, Sp;
    for (int b = 0; b < 3; ++b) {
      wp[b] = ScalarField(grid);
      Sp[b] = ScalarField(grid);
    }
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 4; ++m) {
        int k[3];
        do {
          for (int dd = 0; dd < 3; ++dd)
            k[dd] = int(detail::splitmix64(st) % 7) - 3;
        } while (k[0] == 0 && k[1] == 0 && k[2] == 0);
        const double aw = detail::uniform01(st) - 0.5;
        const double as = detail::uniform01(st) - 0.5;
        const double ph = 6.283185307179586 * detail::uniform01(st);
        const TorusGrid& gr = *grid;
        for (int i = 0; i < gr.n1; ++i)
          for (int j = 0; j < gr.n2; ++j)
            for (int kk = 0; kk < gr.n3; ++kk) {
              auto x = gr.point(i, j, kk);
              const double c = std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph);
              wp[b][gr.index(i, j, kk)] += aw * c;
              Sp[b][gr.index(i, j, kk)] += as * c;
            }
      }
    const double sc = hn_sum(wp, Sp);
    const double f = target / sc;
    for (int b = 0; b < 3; ++b)
      for (std::int64_t i = 0; i < wp[b].size(); ++i) {
        wp[b][i] *= f;
        Sp[b][i] *= f;
      }
    probes.emplace_back(std::move(wp), std::move(Sp));
  }

  auto constants_at = [&](double alpha, double& Cup, double& Clow) {
    Cup = 0.0;
    Clow = 0.0;
    for (auto& [wp, Sp] : probes) {
      const double E = std::sqrt(elliptic_energy_sq(wp, Sp, M, alpha, N));
      const double nrm = hn_sum(wp, Sp);
      if (!(E > 0.0) || !std::isfinite(E)) return false;
      Cup = std::max(Cup, E / nrm);
      Clow = std::max(Clow, nrm / E);
    }
    return std::isfinite(Cup) && std::isfinite(Clow) && Cup <= cap && Clow <= cap;
  };

  EllipticEnergyReport rep;
  rep.N = N;
  rep.lambda = lam;
  rep.Lambda = Lam;
  double Cup = 0, Clow = 0;
  double alpha = 1.0;
  if (!constants_at(alpha, Cup, Clow)) {
    double lo = 1e-6, hi = 1.0;
    bool found = false;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (constants_at(mid, Cup, Clow)) {
        lo = mid;
        found = true;
      } else {
        hi = mid;
      }
    }
    if (!found || !constants_at(lo, Cup, Clow))
      throw std::runtime_error(
          "coercivity_check: no alpha > 1e-6 admits finite comparison constants "
          "(implementation bug, not a math failure)");
    alpha = lo;
  }
  rep.alpha_star = alpha;
  rep.C_upper = Cup;
  rep.C_lower = Clow;
  rep.energy = scale0 > 1e-14
                   ? std::sqrt(elliptic_energy_sq(w0, S0, M, alpha, N))
                   : 0.0;
  return rep;
}

RegularityReport regularity_report(const std::vector<FluidState>& snapshots, int N) {
  RegularityReport rep;
  for (const auto& snap : snapshots) {
    ExtendedState X = complete_state(snap);
    rep.times.push_back(snap.time);
    auto grid = X.base.grid;
    ScalarField u0m1(grid);
    for (std::int64_t i = 0; i < u0m1.size(); ++i) u0m1[i] = X.u0[i] - 1.0;
    double u_norm = sobolev_norm(u0m1, N);
    for (int a = 0; a < 3; ++a) u_norm += sobolev_norm(X.base.u[a], N);
    ScalarField S0(grid);
    for (std::int64_t i = 0; i < S0.size(); ++i) S0[i] = -X.Ts[i];
    double S_norm = sobolev_norm(S0, N);
    for (int a = 0; a < 3; ++a) S_norm += sobolev_norm(X.Ds[a], N);
    double w_norm = 0.0;
    for (int a = 0; a < 4; ++a) w_norm += sobolev_norm(X.varpi[a], N);
    rep.norms["h_HN"].push_back(sobolev_norm(X.base.h, N));
    rep.norms["u_HN"].push_back(u_norm);
    rep.norms["s_HN1"].push_back(sobolev_norm(X.base.s, double(N) + 1.0));
    rep.norms["S_HN"].push_back(S_norm);
    rep.norms["varpi_HN"].push_back(w_norm);
  }
  // Exponential envelope: least-squares slope of log(norm) over time.
  for (auto& [key, series] : rep.norms) {
    const int m = int(series.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = 0; k < m; ++k) {
      if (series[k] <= 1e-300) continue;
      const double x = rep.times[k], y = std::log(series[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    double rate = 0.0;
    if (cnt >= 2 && cnt * sxx - sx * sx > 0) rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    rep.envelope_rate[key] = rate;
    rep.max_envelope_rate = std::max(rep.max_envelope_rate, rate);
    // Super-exponential growth shows up as log-norms bending above the fit.
    const double b0 = (sy - rate * sx) / std::max(1, cnt);
    for (int k = 0; k < m; ++k) {
      if (series[k] <= 1e-300) continue;
      if (std::log(series[k]) - (b0 + rate * rep.times[k]) > 0.7)
        rep.super_exponential_flag = true;
    }
  }
  return rep;
}

}  // namespace anl
