#include "anl/structure.hpp"

#include <algorithm>
#include <cmath>

#include "anl/state_point.hpp"

namespace anl {

namespace {

// Per-scalar slots for the covariant wave operator: d1[l] is d_l phi as a
// first-order time jet, dd the full (symmetric) second-derivative matrix.
struct WaveScalar {
  TJ<1> d1[4];
  double dd[4][4];
  double v = 0;
};

enum WaveSel { WS_H = 0, WS_S = 1, WS_U0 = 2, WS_U1 = 3, WS_U2 = 4, WS_U3 = 5 };

WaveScalar build_wave_scalar(const PointView& p, int sel) {
  WaveScalar w;
  const ExtendedState& X = p.X;
  const auto i = p.i;
  if (sel == WS_H || sel == WS_S) {
    const bool ish = sel == WS_H;
    w.v = ish ? X.base.h[i] : X.base.s[i];
    w.d1[0] = ish ? tshift(p.h<2>()) : tshift(p.s<2>());
    for (int a = 0; a < 3; ++a) w.d1[1 + a] = ish ? p.Dh<1>(a) : p.Ds<1>(a);
    w.dd[0][0] = ish ? X.T2h[i] : X.T2s[i];
    for (int a = 0; a < 3; ++a)
      w.dd[0][1 + a] = w.dd[1 + a][0] = ish ? X.DTh[a][i] : X.DTs[a][i];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        w.dd[1 + a][1 + b] = ish ? X.DDh[sym6(a, b)][i] : X.DDs[sym6(a, b)][i];
  } else if (sel == WS_U0) {
    w.v = X.u0[i];
    const TJ<3> u0j = p.u0<3>();
    w.d1[0] = TJ<1>::make(u0j.c[1], u0j.c[2]);
    for (int a = 0; a < 3; ++a) w.d1[1 + a] = p.Du0<1>(a);
    w.dd[0][0] = u0j.c[2];
    for (int a = 0; a < 3; ++a) w.dd[0][1 + a] = w.dd[1 + a][0] = p.Du0<1>(a).c[1];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) w.dd[1 + a][1 + b] = p.DDu0<0>(a, b).c[0];
  } else {
    const int b0 = sel - WS_U1;
    w.v = X.base.u[b0][i];
    w.d1[0] = tshift(p.u<2>(b0));
    for (int a = 0; a < 3; ++a) w.d1[1 + a] = p.Du<1>(b0, a);
    w.dd[0][0] = X.T2u[b0][i];
    for (int a = 0; a < 3; ++a) w.dd[0][1 + a] = w.dd[1 + a][0] = X.DTu[b0][a][i];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) w.dd[1 + a][1 + b] = X.DDu[b0][sym6(a, b)][i];
  }
  return w;
}

// First-order expansion of box_g valid along solutions of the system.
double box_expansion(const PointView& p, const WaveScalar& ws, const PointVals& v,
                 const PointDerivs& d) {
  const double c = v.T.c, c2 = c * c;
  const double divu = d.du[0][0] + d.du[1][1] + d.du[2][2] + d.du[3][3];

  TJ<1> wjet(0.0);
  const Vec4<TJ<1>> u1 = p.u4<1>();
  for (int l = 0; l < 4; ++l) wjet = wjet + u1[l] * ws.d1[l];
  double udw = v.u[0] * wjet.c[1];
  for (int a = 0; a < 3; ++a) {
    double daw = 0.0;
    for (int l = 0; l < 4; ++l)
      daw += d.du[l][1 + a] * ws.d1[l].c[0] + v.u[l] * ws.dd[l][1 + a];
    udw += v.u[1 + a] * daw;
  }

  double etadd = -ws.dd[0][0];
  for (int a = 1; a < 4; ++a) etadd += ws.dd[a][a];

  double udh = 0.0, udphi = 0.0, etadhdphi = 0.0, sdphi = 0.0;
  for (int l = 0; l < 4; ++l) {
    udh += v.u[l] * d.dh[l];
    udphi += v.u[l] * ws.d1[l].c[0];
    etadhdphi += eta_diag(l) * d.dh[l] * ws.d1[l].c[0];
    sdphi += v.S[l] * ws.d1[l].c[0];
  }
  const double ginv_dh_dphi = c2 * etadhdphi + (c2 - 1.0) * udh * udphi;

  return (c2 - 1.0) * udw + c2 * etadd + (c2 - 1.0) * divu * wjet.c[0] +
         2.0 * (v.T.c_h / c) * udh * wjet.c[0] - (v.T.c_h / c) * ginv_dh_dphi -
         c * v.T.c_s * sdphi;
}

}  // namespace

NullFormPoint standard_null_forms(const Mat4<double>& g_inv, const Vec4<double>& dphi,
                                  const Vec4<double>& dpsi) {
  NullFormPoint out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      out.Qg += g_inv[a][b] * dphi[a] * dpsi[b];
      out.Qmn[a][b] = dphi[a] * dpsi[b] - dphi[b] * dpsi[a];
    }
  return out;
}

void make_point_data(const ExtendedState& X, std::int64_t i, const ThermoEval& T,
                     PointVals& v, PointDerivs& d) {
  PointView p(X, i);
  v.T = T;
  v.u[0] = X.u0[i];
  for (int a = 0; a < 3; ++a) v.u[1 + a] = X.base.u[a][i];
  for (int k = 0; k < 4; ++k) v.ul[k] = eta_diag(k) * v.u[k];
  v.Sl[0] = X.Ts[i];
  for (int a = 0; a < 3; ++a) v.Sl[1 + a] = X.Ds[a][i];
  for (int k = 0; k < 4; ++k) v.S[k] = eta_diag(k) * v.Sl[k];
  for (int k = 0; k < 4; ++k) {
    v.w[k] = X.varpi[k][i];
    v.wl[k] = eta_diag(k) * v.w[k];
    v.C[k] = X.Cmod[k][i];
  }
  v.Dcal = X.Dcal[i];

  for (int l = 0; l < 4; ++l) {
    d.dh[l] = p.dh<0>(l).c[0];
    d.ds[l] = p.ds<0>(l).c[0];
  }
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      d.du[k][l] = p.du<0>(k, l).c[0];
      d.dul[k][l] = eta_diag(k) * d.du[k][l];
      d.dS[l][k] = p.dS_upper<0>(l, k).c[0];
      d.dw[l][k] = p.dvarpi_upper<0>(l, k).c[0];
      d.dHU[l][k] = p.dHU<0>(l, k).c[0];
    }
}

Forms eval_forms(const PointVals& v, const PointDerivs& d, Fault fault) {
  Forms f;
  const ThermoEval& T = v.T;
  const double c = T.c, c2 = c * c, ic2 = 1.0 / c2;
  const double th = T.theta, th_h = T.theta_h, th_s = T.theta_s;
  const double th_hh = T.theta_hh, th_hs = T.theta_hs;
  const double H = T.H, n = T.n, q = T.q;

  double divu = 0.0, SS = 0.0, Sdh = 0.0, udh = 0.0, wS = 0.0, wdh = 0.0;
  for (int k = 0; k < 4; ++k) {
    divu += d.du[k][k];
    SS += v.S[k] * v.Sl[k];
    Sdh += v.S[k] * d.dh[k];
    udh += v.u[k] * d.dh[k];
    wS += v.w[k] * v.Sl[k];
    wdh += v.w[k] * d.dh[k];
  }
  double dudu = 0.0;  // (d_l u^k)(d_k u^l)
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) dudu += d.du[k][l] * d.du[l][k];
  double ginv_dhdh = 0.0;
  for (int k = 0; k < 4; ++k) ginv_dhdh += eta_diag(k) * d.dh[k] * d.dh[k];
  ginv_dhdh = c2 * ginv_dhdh + (c2 - 1.0) * udh * udh;

  // ---- wave-h --------------------------------------------------------------
  f.Qh = -(T.c_h / c) * ginv_dhdh + c2 * (divu * divu - dudu);
  {
    double coef_qh = c2 * T.q_h;
    double coef_qs = c2 * T.q_s;
    if (fault == Fault::Lh_FlipQh) coef_qh = -coef_qh;
    if (fault == Fault::Lh_FlipQs) coef_qs = -coef_qs;
    f.Lh = ((1.0 - c2) * q + coef_qh - c * T.c_s) * Sdh + coef_qs * SS;
  }

  // ---- auxiliary wave-s ----------------------------------------------------
  f.Ls = (1.0 - c2 - c * T.c_h) * Sdh - c * T.c_s * SS;

  // ---- wave-u^alpha ----------------------------------------------------------
  for (int al = 0; al < 4; ++al) {
    double brace1 = divu * d.dh[al];
    for (int k = 0; k < 4; ++k) brace1 -= d.du[k][al] * d.dh[k];
    brace1 *= eta_diag(al);
    if (fault == Fault::Qu_FlipFirst) brace1 = -brace1;

    double ginv_dh_dua = 0.0;
    for (int k = 0; k < 4; ++k)
      ginv_dh_dua += eta_diag(k) * d.dh[k] * d.du[al][k];
    double udua = 0.0;
    for (int l = 0; l < 4; ++l) udua += v.u[l] * d.du[al][l];
    ginv_dh_dua = c2 * ginv_dh_dua + (c2 - 1.0) * udh * udua;
    double grad_term = -(1.0 + T.c_h / c) * ginv_dh_dua;
    if (fault == Fault::Qu_FlipGradH) grad_term = -grad_term;

    f.Qu[al] = brace1 + c2 * v.u[al] * (dudu - divu * divu) + grad_term;

    double lu = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int g = 0; g < 4; ++g)
        for (int dd = 0; dd < 4; ++dd) {
          const int e = eps4_upper(al, b, g, dd);
          if (!e) continue;
          lu += double(e) * (-(c2 / H) * d.dul[g][b] * v.wl[dd] +
                             ((1.0 - c2) / H) * v.ul[b] * d.dh[g] * v.wl[dd] +
                             ((1.0 - c2) * q / H) * v.Sl[b] * v.ul[g] * v.wl[dd]);
        }
    double Sdua = 0.0, Suduk = 0.0, Sdua_eta = 0.0;
    for (int k = 0; k < 4; ++k) {
      Sdua += v.S[k] * d.du[al][k];
      double uduk = 0.0;
      for (int l = 0; l < 4; ++l) uduk += v.u[l] * d.dul[k][l];
      Suduk += v.S[k] * uduk;
      Sdua_eta += v.S[k] * eta_diag(al) * d.dul[k][al];
    }
    lu += (q - c * T.c_s) * Sdua;
    lu += q * (c2 - 1.0) * v.u[al] * Suduk;
    // c^2 q - (theta - theta_h) c^2 / H: the sign of the theta-part is
    // pinned by the exact series oracle (tests/oracle/symbolic_check.py).
    lu += (c2 * q - (th - th_h) * c2 / H) * Sdua_eta;
    lu += (2.0 * (T.c_h / c) * q + 2.0 * (T.c_s / c) - T.q_h) * v.S[al] * udh;
    lu += v.S[al] * ((th - th_h) * c2 / H - q) * divu;
    lu += ((th - th_h) * c2 / H) * v.u[al] * Sdh;
    f.Lu[al] = lu;
  }

  // ---- transport-D pieces ----------------------------------------------------
  {
    double qd = 0.0;
    for (int k = 0; k < 4; ++k) {
      double inner = 0.0;
      for (int l = 0; l < 4; ++l) inner += d.du[l][k] * d.dh[l];
      qd += v.S[k] * (inner - divu * d.dh[k]);
    }
    f.QD = (ic2 / n) * qd;

    double ld = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(a, b, g, dd);
            if (!e) continue;
            ld += double(e) * (((1.0 - ic2) / (n * H)) * v.Sl[a] * v.ul[b] * d.dh[g] * v.wl[dd] +
                               (1.0 / (n * H)) * v.Sl[a] * d.dul[g][b] * v.wl[dd]);
          }
    double SSdu = 0.0;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) SSdu += v.S[k] * v.S[l] * d.dul[l][k];
    ld += (1.0 / n) * ((th - th_h) / H - 2.0 * q) * SSdu;
    ld += (SS / n) * ((th_h - th) / H + 2.0 * (T.c_s / c) - c2 * T.q_h + q) * divu;
    f.LD = ld;
  }

  // ---- transport-C pieces -----------------------------------------------------
  for (int al = 0; al < 4; ++al) {
    double qc = 0.0;
    // -c^-2 eps^{k b g d} (d_k u^al) u_b (d_g h) w_d
    for (int k = 0; k < 4; ++k)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(k, b, g, dd);
            if (!e) continue;
            qc -= ic2 * double(e) * d.du[al][k] * v.ul[b] * d.dh[g] * v.wl[dd];
          }
    for (int b = 0; b < 4; ++b)
      for (int g = 0; g < 4; ++g)
        for (int dd = 0; dd < 4; ++dd) {
          const int e = eps4_upper(al, b, g, dd);
          if (!e) continue;
          double wdu = 0.0;
          for (int k = 0; k < 4; ++k) wdu += v.w[k] * d.dul[k][dd];
          qc += (ic2 + 2.0) * double(e) * v.ul[b] * d.dh[g] * wdu;
          double inner = divu * d.dh[g];
          for (int k = 0; k < 4; ++k) inner -= d.du[k][g] * d.dh[k];
          qc += ic2 * double(e) * v.ul[b] * v.wl[dd] * inner;
        }
    // {(th_hh - th_h) + c^-2 (th - th_h)} u^k eta^{al al} S^b {dh_k du_b,al - dh_al du_b,k}
    {
      const double coef = (th_hh - th_h) + ic2 * (th - th_h);
      double acc = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int b = 0; b < 4; ++b)
          acc += v.u[k] * v.S[b] *
                 (d.dh[k] * d.dul[b][al] - d.dh[al] * d.dul[b][k]);
      qc += coef * eta_diag(al) * acc;
    }
    {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          acc += v.S[k] * v.u[l] * (d.du[al][k] * d.dh[l] - d.du[al][l] * d.dh[k]);
      qc += (th_h - th) * acc;
    }
    {
      // Brace {2 eta^{ak} + u^a u^k}: the doubled eta-part is pinned by the
      // exact-coefficient solve (tests/oracle/solve_C.py).
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double m = (k == al ? 2.0 * eta_diag(al) : 0.0) + v.u[al] * v.u[k];
        double inner = 0.0;
        for (int b = 0; b < 4; ++b) {
          double dub_contr = d.dul[b][k] * divu;
          for (int l = 0; l < 4; ++l) dub_contr -= d.dul[b][l] * d.du[l][k];
          inner += v.S[b] * dub_contr;
        }
        acc += m * inner;
      }
      qc += (th_h - th) * acc;
    }
    qc += (th_h - th) * v.S[al] * (dudu - divu * divu);
    {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        double inner = d.du[al][k] * divu;
        for (int l = 0; l < 4; ++l) inner -= d.du[al][l] * d.du[l][k];
        acc += v.S[k] * inner;
      }
      qc += (th_h - th) * acc;
    }
    qc += v.S[al] * (ic2 * (th_h - th_hh) + ic2 * ic2 * (th_h - th)) * ginv_dhdh;
    f.QC[al] = qc;

    double lc = 0.0;
    lc += (2.0 * q / H) * wS * v.w[al];
    lc -= (2.0 / H) * v.w[al] * wdh;
    for (int b = 0; b < 4; ++b)
      for (int g = 0; g < 4; ++g)
        for (int dd = 0; dd < 4; ++dd) {
          const int e = eps4_upper(al, b, g, dd);
          if (!e) continue;
          lc += 2.0 * (T.c_s / (c2 * c)) * double(e) * v.ul[b] * v.Sl[g] * v.wl[dd] * udh;
          double wdu = 0.0;
          for (int k = 0; k < 4; ++k) wdu += v.w[k] * d.dul[k][dd];
          lc -= 2.0 * q * double(e) * v.ul[b] * v.Sl[g] * wdu;
          lc -= q * double(e) * v.Sl[b] * v.ul[g] * v.wl[dd] * divu;
          lc += ic2 * q * double(e) * v.Sl[b] * d.dh[g] * v.wl[dd];
        }
    for (int k = 0; k < 4; ++k)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(k, b, g, dd);
            if (!e) continue;
            lc += ((th - th_h) / H) * double(e) * d.du[al][k] * v.Sl[b] * v.ul[g] * v.wl[dd];
            lc -= ic2 * q * v.u[al] * double(e) * v.Sl[k] * v.ul[b] * d.dh[g] * v.wl[dd];
          }
    {
      double udual = 0.0;
      for (int l = 0; l < 4; ++l) udual += v.u[l] * d.du[al][l];
      lc += (th_h - th) * q * SS * udual;
    }
    lc += v.u[al] * SS * ((th_h - th) * q + (th_hs - th_s)) * udh;
    lc += v.S[al] * ((th_s - th_hs) + (th - th_h) * T.q_h) * Sdh;
    lc += SS *
          ((th_hh - th_h) * q + (th_hs - th_s) + (th - th_h) * q * ic2 +
           (th_h - th) * T.q_h) *
          eta_diag(al) * d.dh[al];
    f.LC[al] = lc;
  }
  return f;
}

NullFormSet assemble_inhomogeneous(const ExtendedState& X, Fault fault) {
  auto g = X.base.grid;
  NullFormSet out;
  out.Qh = ScalarField(g);
  out.Lh = ScalarField(g);
  out.Ls = ScalarField(g);
  out.QD = ScalarField(g);
  out.LD = ScalarField(g);
  for (int a = 0; a < 4; ++a) {
    out.Qu[a] = ScalarField(g);
    out.Lu[a] = ScalarField(g);
    out.QC[a] = ScalarField(g);
    out.LC[a] = ScalarField(g);
  }
  const std::int64_t n = X.base.h.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const Forms f = eval_forms(v, d, fault);
    out.Qh[i] = f.Qh;
    out.Lh[i] = f.Lh;
    out.Ls[i] = f.Ls;
    out.QD[i] = f.QD;
    out.LD[i] = f.LD;
    for (int al = 0; al < 4; ++al) {
      out.Qu[al][i] = f.Qu[al];
      out.Lu[al][i] = f.Lu[al];
      out.QC[al][i] = f.QC[al];
      out.LC[al][i] = f.LC[al];
    }
  }
  return out;
}

const std::vector<std::string>& equation_names() {
  static const std::vector<std::string> names = {
      "wave-h",      "wave-u",     "wave-s",   "transport-S", "transport-varpi",
      "transport-D", "curl-S",     "div-varpi", "transport-C"};
  return names;
}

double ResidualReport::linf(const std::string& eq) const {
  for (const auto& r : rows)
    if (r.equation == eq) return r.linf;
  return -1.0;
}

FormulationResiduals formulation_residuals(const ExtendedState& X, Fault fault) {
  auto g = X.base.grid;
  const std::int64_t n = X.base.h.size();

  // Component fields: wave-h, wave-u[0..3], wave-s, transport-S[0..3],
  // transport-varpi[0..3], transport-D, curl-S[0..3], div-varpi,
  // transport-C[0..3].
  std::vector<std::pair<std::string, ScalarField>> fields;
  fields.reserve(32);  // references below must stay valid
  auto add = [&](const std::string& name) -> ScalarField& {
    fields.emplace_back(name, ScalarField(g));
    return fields.back().second;
  };
  ScalarField& r_wh = add("wave-h");
  std::array<ScalarField*, 4> r_wu;
  for (int a = 0; a < 4; ++a) r_wu[a] = &add("wave-u[" + std::to_string(a) + "]");
  ScalarField& r_ws = add("wave-s");
  std::array<ScalarField*, 4> r_tS;
  for (int a = 0; a < 4; ++a) r_tS[a] = &add("transport-S[" + std::to_string(a) + "]");
  std::array<ScalarField*, 4> r_tW;
  for (int a = 0; a < 4; ++a) r_tW[a] = &add("transport-varpi[" + std::to_string(a) + "]");
  ScalarField& r_tD = add("transport-D");
  std::array<ScalarField*, 4> r_cS;
  for (int a = 0; a < 4; ++a) r_cS[a] = &add("curl-S[" + std::to_string(a) + "]");
  ScalarField& r_dW = add("div-varpi");
  std::array<ScalarField*, 4> r_tC;
  for (int a = 0; a < 4; ++a) r_tC[a] = &add("transport-C[" + std::to_string(a) + "]");

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const Forms f = eval_forms(v, d, fault);
    const double c2 = T.c * T.c;

    // Wave equations via the first-order expansion of box_g.
    r_wh[i] = box_expansion(p, build_wave_scalar(p, WS_H), v, d) -
              (T.n * c2 * T.q * v.Dcal + f.Qh + f.Lh);
    for (int al = 0; al < 4; ++al)
      (*r_wu[al])[i] = box_expansion(p, build_wave_scalar(p, WS_U0 + al), v, d) -
                       (-(c2 / T.H) * v.C[al] + f.Qu[al] + f.Lu[al]);
    r_ws[i] =
        box_expansion(p, build_wave_scalar(p, WS_S), v, d) - (c2 * T.n * v.Dcal + f.Ls);

    // Transport of the entropy gradient.
    for (int al = 0; al < 4; ++al) {
      double lhs = 0.0;
      for (int k = 0; k < 4; ++k) lhs += v.u[k] * d.dS[k][al];
      double rhs = 0.0;
      for (int k = 0; k < 4; ++k) rhs -= v.Sl[k] * eta_diag(al) * d.du[k][al];
      (*r_tS[al])[i] = lhs - rhs;
    }

    // Transport of the vorticity.
    for (int al = 0; al < 4; ++al) {
      double lhs = 0.0;
      for (int k = 0; k < 4; ++k) lhs += v.u[k] * d.dw[k][al];
      double wdh = 0.0, wS = 0.0, divu = 0.0, wdu = 0.0;
      for (int k = 0; k < 4; ++k) {
        wdh += v.w[k] * d.dh[k];
        wS += v.w[k] * v.Sl[k];
        divu += d.du[k][k];
        wdu += v.w[k] * d.du[al][k];
      }
      double rhs = -v.u[al] * wdh + wdu - v.w[al] * divu + T.q * v.u[al] * wS;
      for (int b = 0; b < 4; ++b)
        for (int gm = 0; gm < 4; ++gm)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(al, b, gm, dd);
            if (e)
              rhs += (T.theta - T.theta_h) * double(e) * v.ul[b] * d.dh[gm] * v.Sl[dd];
          }
      (*r_tW[al])[i] = lhs - rhs;
    }

    // Transport of D.
    {
      const TJ<1> Dj = p.Dmod<1>();
      double lhs = v.u[0] * Dj.c[1];
      for (int a = 0; a < 3; ++a) lhs += v.u[1 + a] * X.DDcal[a][i];
      double divS = 0.0, divu = 0.0;
      for (int k = 0; k < 4; ++k) {
        divS += d.dS[k][k];
        divu += d.du[k][k];
      }
      double cross1 = 0.0;  // (d_l S^k)(d_k u^l)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) cross1 += d.dS[l][k] * d.du[l][k];
      double term2 = 0.0;
      for (int k = 0; k < 4; ++k) {
        double inner = d.dh[k] * divS;
        for (int l = 0; l < 4; ++l) inner -= d.dh[l] * d.dS[k][l];
        term2 += v.u[k] * inner;
      }
      double SC = 0.0;
      for (int k = 0; k < 4; ++k) SC += v.Sl[k] * v.C[k];
      double rhs = (2.0 / T.n) * (divS * divu - cross1) +
                   (1.0 / (T.n * c2)) * term2 + SC / (T.n * T.H) + f.QD + f.LD;
      r_tD[i] = lhs - rhs;
    }

    // curl of S (vanishes identically by slot symmetry).
    for (int al = 0; al < 4; ++al) {
      double acc = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int gm = 0; gm < 4; ++gm)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(al, b, gm, dd);
            if (e) acc -= double(e) * v.ul[b] * eta_diag(dd) * d.dS[gm][dd];
          }
      (*r_cS[al])[i] = acc;
    }

    // Divergence of the vorticity.
    {
      double divw = 0.0, wdh = 0.0, wS = 0.0;
      for (int k = 0; k < 4; ++k) {
        divw += d.dw[k][k];
        wdh += v.w[k] * d.dh[k];
        wS += v.w[k] * v.Sl[k];
      }
      r_dW[i] = divw - (-wdh + 2.0 * T.q * wS);
    }

    // Transport of C.
    {
      const Vec4<TJ<1>> Cj = p.Cmod<1>();
      double divu = 0.0, udh = 0.0, divS = 0.0;
      for (int k = 0; k < 4; ++k) {
        divu += d.du[k][k];
        udh += v.u[k] * d.dh[k];
        divS += d.dS[k][k];
      }
      for (int al = 0; al < 4; ++al) {
        double lhs = v.u[0] * Cj[al].c[1];
        for (int a = 0; a < 3; ++a) lhs += v.u[1 + a] * X.DCmod[al][a][i];

        double rhs = f.QC[al] + f.LC[al];
        double Cdu = 0.0, Cudu = 0.0;
        for (int k = 0; k < 4; ++k) {
          Cdu += v.C[k] * d.du[al][k];
          double uduk = 0.0;
          for (int l = 0; l < 4; ++l) uduk += v.u[l] * d.dul[k][l];
          Cudu += v.C[k] * uduk;
        }
        rhs += Cdu - 2.0 * v.C[al] * divu + v.u[al] * Cudu;
        for (int b = 0; b < 4; ++b)
          for (int gm = 0; gm < 4; ++gm)
            for (int dd = 0; dd < 4; ++dd) {
              const int e = eps4_upper(al, b, gm, dd);
              if (!e) continue;
              double wdu = 0.0;
              for (int k = 0; k < 4; ++k) wdu += d.dw[gm][k] * d.dul[k][dd];
              rhs -= 2.0 * double(e) * v.ul[b] * wdu;
            }
        for (int k = 0; k < 4; ++k) {
          const double m = (k == al ? eta_diag(al) : 0.0) + 2.0 * v.u[al] * v.u[k];
          double inner = d.dh[k] * divS;
          for (int l = 0; l < 4; ++l) inner -= d.dh[l] * d.dS[k][l];
          rhs += (T.theta_h - T.theta) * m * inner;
        }
        rhs += (T.theta - T.theta_h) * T.n * v.u[al] * udh * v.Dcal;
        rhs += (T.theta - T.theta_h) * T.q * v.S[al] * divS;
        {
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) acc += v.Sl[k] * eta_diag(al) * d.dS[al][k];
          rhs += (T.theta_h - T.theta) * T.q * acc;
        }
        (*r_tC[al])[i] = lhs - rhs;
      }
    }
  }

  // Aggregate the component fields into the nine equations.
  FormulationResiduals out;
  out.fields = std::move(fields);
  out.report.n1 = g->n1;
  out.report.n2 = g->n2;
  out.report.n3 = g->n3;
  out.report.mode = g->mode == DerivMode::Spectral ? "spectral" : "fd4";
  out.report.eos_tag = X.base.eos.tag;
  auto agg = [&](const std::string& eq, const std::string& prefix) {
    ResidualReport::Row row{eq, 0.0, 0.0};
    for (auto& [name, fld] : out.fields) {
      if (name.rfind(prefix, 0) != 0) continue;
      row.linf = std::max(row.linf, linf_norm(fld));
      const double l2 = l2_norm(fld);
      row.l2 = std::sqrt(row.l2 * row.l2 + l2 * l2);
    }
    out.report.rows.push_back(row);
  };
  agg("wave-h", "wave-h");
  agg("wave-u", "wave-u[");
  agg("wave-s", "wave-s");
  agg("transport-S", "transport-S[");
  agg("transport-varpi", "transport-varpi[");
  agg("transport-D", "transport-D");
  agg("curl-S", "curl-S[");
  agg("div-varpi", "div-varpi");
  agg("transport-C", "transport-C[");
  return out;
}

std::vector<IdentityCase> identity_suite(const ExtendedState& X) {
  const std::int64_t n = X.base.h.size();
  struct Acc {
    double linf_abs = 0, linf_rel = 0, sum2 = 0;
  };
  std::vector<std::string> names = {
      "u-du-contraction",      "one-form-decomposition", "projected-antisym-norm",
      "lie-epsilon",           "dHu-antisymmetry",       "du-antisymmetry",
      "eps-u-du-is-vorticity", "div-varpi-identity",     "transfer-S",
      "transfer-varpi"};
  std::vector<IdentityCase::Class> classes = {
      IdentityCase::Class::Kinematic, IdentityCase::Class::Kinematic,
      IdentityCase::Class::Kinematic, IdentityCase::Class::Kinematic,
      IdentityCase::Class::Dynamic,   IdentityCase::Class::Dynamic,
      IdentityCase::Class::Dynamic,   IdentityCase::Class::Dynamic,
      IdentityCase::Class::Dynamic,   IdentityCase::Class::Dynamic};
  std::vector<Acc> acc(names.size());

  for (std::int64_t i = 0; i < n; ++i) {
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    auto upd = [&](int id, double res, double scale) {
      acc[id].linf_abs = std::max(acc[id].linf_abs, std::abs(res));
      acc[id].linf_rel = std::max(acc[id].linf_rel, std::abs(res) / std::max(1.0, scale));
      acc[id].sum2 += res * res;
    };

    // K1: u^k d_a u_k = 0.
    for (int al = 0; al < 4; ++al) {
      double r = 0.0, sc = 0.0;
      for (int k = 0; k < 4; ++k) {
        r += v.u[k] * d.dul[k][al];
        sc += std::abs(v.u[k] * d.dul[k][al]);
      }
      upd(0, r, sc);
    }

    // vort(V) for V = H u_flat from the same slots.
    double vortV[4];
    for (int a = 0; a < 4; ++a) {
      vortV[a] = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(a, b, g, dd);
            if (e) vortV[a] -= double(e) * v.ul[b] * d.dHU[g][dd];
          }
    }

    // K2: antisymmetric part of dV in terms of vort(V) and u-parts.
    for (int al = 0; al < 4; ++al)
      for (int be = al + 1; be < 4; ++be) {
        const double lhs = d.dHU[al][be] - d.dHU[be][al];
        double rhs = 0.0;
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_lower(al, be, g, dd);
            if (e) rhs += double(e) * v.u[g] * vortV[dd];
          }
        double uDbV = 0.0, uDaV = 0.0, uDV_a = 0.0, uDV_b = 0.0;
        for (int k = 0; k < 4; ++k) {
          uDbV += v.u[k] * d.dHU[be][k];
          uDaV += v.u[k] * d.dHU[al][k];
          uDV_a += v.u[k] * d.dHU[k][al];
          uDV_b += v.u[k] * d.dHU[k][be];
        }
        rhs += v.ul[al] * uDbV - v.ul[be] * uDaV + v.ul[be] * uDV_a - v.ul[al] * uDV_b;
        upd(1, lhs - rhs, std::abs(lhs) + std::abs(rhs));
      }

    // K3: Pi Pi (dV)(dV) = 2 Pi vort vort.
    {
      double lhs = 0.0, rhs = 0.0;
      double Pi[4][4];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          Pi[a][b] = (a == b ? eta_diag(a) : 0.0) + v.u[a] * v.u[b];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int g = 0; g < 4; ++g)
            for (int dd = 0; dd < 4; ++dd)
              lhs += Pi[a][b] * Pi[g][dd] * (d.dHU[a][g] - d.dHU[g][a]) *
                     (d.dHU[b][dd] - d.dHU[dd][b]);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          rhs += 2.0 * Pi[a][b] * eta_diag(a) * vortV[a] * eta_diag(b) * vortV[b];
      upd(2, lhs - rhs, std::abs(lhs) + std::abs(rhs));
    }

    // K4: Lie_u eps^{abcd} = -(div u) eps^{abcd}.
    {
      double divu = 0.0;
      for (int k = 0; k < 4; ++k) divu += d.du[k][k];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int g = 0; g < 4; ++g)
            for (int dd = 0; dd < 4; ++dd) {
              double lie = 0.0;
              for (int k = 0; k < 4; ++k)
                lie -= d.du[a][k] * eps4_upper(k, b, g, dd) +
                       d.du[b][k] * eps4_upper(a, k, g, dd) +
                       d.du[g][k] * eps4_upper(a, b, k, dd) +
                       d.du[dd][k] * eps4_upper(a, b, g, k);
              const double rhs = -divu * eps4_upper(a, b, g, dd);
              upd(3, lie - rhs, std::abs(lie) + std::abs(rhs));
            }
    }

    // D1: d(Hu) antisymmetry with the evolution equations.
    for (int al = 0; al < 4; ++al)
      for (int be = al + 1; be < 4; ++be) {
        double r = d.dHU[al][be] - d.dHU[be][al];
        double sc = std::abs(r);
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_lower(al, be, g, dd);
            if (e) r -= double(e) * v.u[g] * v.w[dd];
          }
        r -= T.theta * (v.Sl[al] * v.ul[be] - v.Sl[be] * v.ul[al]);
        upd(4, r, sc + std::abs(T.theta * (v.Sl[al] * v.ul[be] - v.Sl[be] * v.ul[al])));
      }

    // D2: du antisymmetry.
    for (int al = 0; al < 4; ++al)
      for (int be = al + 1; be < 4; ++be) {
        double r = d.dul[be][al] - d.dul[al][be];
        const double sc = std::abs(r) + 1.0;
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_lower(al, be, g, dd);
            if (e) r -= (1.0 / T.H) * double(e) * v.u[g] * v.w[dd];
          }
        r += d.dh[al] * v.ul[be] - d.dh[be] * v.ul[al];
        r -= T.q * (v.Sl[al] * v.ul[be] - v.Sl[be] * v.ul[al]);
        upd(5, r, sc);
      }

    // D3: eps u du = -varpi / H.
    for (int al = 0; al < 4; ++al) {
      double r = v.w[al] / T.H;
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int dd = 0; dd < 4; ++dd) {
            const int e = eps4_upper(al, b, g, dd);
            if (e) r += double(e) * v.ul[b] * d.dul[dd][g];
          }
      upd(6, r, std::abs(v.w[al] / T.H) + 1.0);
    }

    // D4: div varpi identity.
    {
      double divw = 0.0, wdh = 0.0, wS = 0.0;
      for (int k = 0; k < 4; ++k) {
        divw += d.dw[k][k];
        wdh += v.w[k] * d.dh[k];
        wS += v.w[k] * v.Sl[k];
      }
      upd(7, divw + wdh - 2.0 * T.q * wS,
          std::abs(divw) + std::abs(wdh) + std::abs(2.0 * T.q * wS));
    }

    // D5/D6: transfer of derivatives through the orthogonality relations.
    for (int al = 0; al < 4; ++al) {
      double r5 = 0.0, r6 = 0.0, sc5 = 0.0, sc6 = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double dSl = eta_diag(k) * d.dS[al][k];  // d_al S_k
        r5 += v.u[k] * dSl + v.S[k] * d.dul[k][al];
        sc5 += std::abs(v.u[k] * dSl) + std::abs(v.S[k] * d.dul[k][al]);
        const double dwl = eta_diag(k) * d.dw[al][k];  // d_al w_k
        r6 += v.u[k] * dwl + v.w[k] * d.dul[k][al];
        sc6 += std::abs(v.u[k] * dwl) + std::abs(v.w[k] * d.dul[k][al]);
      }
      upd(8, r5, sc5);
      upd(9, r6, sc6);
    }
  }

  std::vector<IdentityCase> out;
  const double cellw = X.base.grid->volume() / double(n);
  for (size_t k = 0; k < names.size(); ++k) {
    IdentityCase c;
    c.name = names[k];
    c.cls = classes[k];
    c.linf_abs = acc[k].linf_abs;
    c.linf_rel = acc[k].linf_rel;
    c.l2 = std::sqrt(acc[k].sum2 * cellw);
    out.push_back(c);
  }
  return out;
}

std::vector<ConvergenceRow> convergence_study(const InitialDataRecipe& recipe,
                                              const EosParams& eos,
                                              const HyperbolicityRegion& region,
                                              const std::vector<int>& sizes, DerivMode mode,
                                              Fault fault) {
  if (sizes.size() < 2) throw std::invalid_argument("convergence_study: need >= 2 sizes");
  std::vector<ResidualReport> reports;
  for (int nsize : sizes) {
    auto grid = std::make_shared<TorusGrid>(nsize, nsize, nsize, mode);
    FluidState st = realize(recipe, grid, eos, region);
    ExtendedState X = complete_state(st);
    reports.push_back(formulation_residuals(X, fault).report);
  }
  std::vector<ConvergenceRow> rows;
  for (const auto& eq : equation_names()) {
    ConvergenceRow row;
    row.equation = eq;
    row.sizes = sizes;
    for (auto& rep : reports) row.linf.push_back(rep.linf(eq));
    const double floor_lvl = 1e-13;
    row.floor = true;
    for (double v : row.linf)
      if (v > floor_lvl) row.floor = false;
    if (!row.floor) {
      // least-squares slope of log(res) against log(n): order = -slope.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const int m = int(sizes.size());
      for (int k = 0; k < m; ++k) {
        const double x = std::log(double(sizes[k]));
        const double y = std::log(std::max(row.linf[k], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      row.fitted_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
      row.decay_factor = row.linf.front() / std::max(row.linf.back(), 1e-300);
    }
    rows.push_back(row);
  }
  return rows;
}

BoxGResult box_g_scalar(const ExtendedState& X, const ScalarField& phi,
                        const ScalarField& dtphi, const ScalarField& dt2phi) {
  auto g = X.base.grid;
  const std::int64_t n = phi.size();
  std::array<ScalarField, 3> Dphi{partial_derivative(phi, 1), partial_derivative(phi, 2),
                                  partial_derivative(phi, 3)};
  std::array<ScalarField, 3> Ddtphi{partial_derivative(dtphi, 1),
                                    partial_derivative(dtphi, 2),
                                    partial_derivative(dtphi, 3)};
  std::array<ScalarField, 6> DDphi;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) DDphi[sym6(a, b)] = partial_derivative(Dphi[a], b + 1);

  // Current fields P^k = c^-3 (g^-1)^{k l} d_l phi.
  std::array<ScalarField, 3> P;
  for (int a = 0; a < 3; ++a) P[a] = ScalarField(g);
  ScalarField dtP0(g);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    const TJ<1> c2 = p.csq<1>();
    const TJ<1> ic3 = 1.0 / (sqrt(c2) * c2);
    const Vec4<TJ<1>> u = p.u4<1>();
    const Mat4<TJ<1>> gi = acoustical_inverse_metric(c2, u);
    Vec4<TJ<1>> dphi{TJ<1>::make(dtphi[i], dt2phi[i]),
                     TJ<1>::make(Dphi[0][i], Ddtphi[0][i]),
                     TJ<1>::make(Dphi[1][i], Ddtphi[1][i]),
                     TJ<1>::make(Dphi[2][i], Ddtphi[2][i])};
    for (int k = 0; k < 4; ++k) {
      TJ<1> Pk(0.0);
      for (int l = 0; l < 4; ++l) Pk = Pk + gi[k][l] * dphi[l];
      Pk = ic3 * Pk;
      if (k == 0)
        dtP0[i] = Pk.c[1];
      else
        P[k - 1][i] = Pk.c[0];
    }
  }
  std::array<ScalarField, 3> DP{partial_derivative(P[0], 1), partial_derivative(P[1], 2),
                                partial_derivative(P[2], 3)};

  BoxGResult out{ScalarField(g), ScalarField(g), 0.0};
  double disc = 0.0;
#pragma omp parallel for schedule(static) reduction(max : disc)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const double c3 = T.c * T.c * T.c;
    out.divergence_form[i] = c3 * (dtP0[i] + DP[0][i] + DP[1][i] + DP[2][i]);

    WaveScalar ws;
    ws.v = phi[i];
    ws.d1[0] = TJ<1>::make(dtphi[i], dt2phi[i]);
    for (int a = 0; a < 3; ++a) ws.d1[1 + a] = TJ<1>::make(Dphi[a][i], Ddtphi[a][i]);
    ws.dd[0][0] = dt2phi[i];
    for (int a = 0; a < 3; ++a) ws.dd[0][1 + a] = ws.dd[1 + a][0] = Ddtphi[a][i];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) ws.dd[1 + a][1 + b] = DDphi[sym6(a, b)][i];
    out.expansion_form[i] = box_expansion(p, ws, v, d);
    disc = std::max(disc, std::abs(out.divergence_form[i] - out.expansion_form[i]));
  }
  out.max_discrepancy = disc;
  return out;
}

std::vector<Christoffel4> christoffel(const ExtendedState& X) {
  const std::int64_t n = X.base.h.size();
  std::vector<Christoffel4> out{size_t(n)};
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const ThermoEval T = eval_thermo(X.base.eos, X.base.h[i], X.base.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const double c2 = T.c * T.c, ic2 = 1.0 / c2;
    // d_l g_{mn} by the chain rule through (c, u).
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
    Mat4<double> gi = acoustical_inverse_metric(c2, Vec4<double>{v.u[0], v.u[1], v.u[2], v.u[3]});
    Christoffel4& G = out[size_t(i)];
    for (int al = 0; al < 4; ++al)
      for (int gm = 0; gm < 4; ++gm)
        for (int be = 0; be < 4; ++be) {
          double acc = 0.0;
          for (int dd = 0; dd < 4; ++dd)
            acc += gi[gm][dd] * (dg[al][dd][be] + dg[be][al][dd] - dg[dd][al][be]);
          G.gamma[al][gm][be] = 0.5 * acc;
        }
  }
  return out;
}

}  // namespace anl
