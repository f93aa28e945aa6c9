#pragma once

#include "anl/fluid.hpp"
#include "anl/jets.hpp"
#include "anl/tensor.hpp"

// Pointwise view of an ExtendedState with truncated time-jet accessors.
// Slot m of a jet is the m-th analytic time derivative along the closure;
// spatial-derivative slots are read from the numeric derivative fields.
// Evaluating any derived formula in this arithmetic yields its closure time
// derivatives exactly, so residuals downstream measure only the spatial
// discretization.

namespace anl {

// d/dt of a jet, one order lower.
template <int K>
TJ<K - 1> tshift(const TJ<K>& j) {
  TJ<K - 1> r;
  for (int m = 0; m + 1 <= K; ++m) r.c[m] = j.c[m + 1];
  return r;
}

struct PointView {
  const ExtendedState& X;
  std::int64_t i;

  PointView(const ExtendedState& x, std::int64_t idx) : X(x), i(idx) {}

  // --- fundamentals -------------------------------------------------------
  template <int K> TJ<K> h() const { return fund<K>(X.base.h, X.Th, X.T2h, X.T3h); }
  template <int K> TJ<K> s() const { return fund<K>(X.base.s, X.Ts, X.T2s, X.T3s); }
  template <int K> TJ<K> u(int a) const {
    return fund<K>(X.base.u[a], X.Tu[a], X.T2u[a], X.T3u[a]);
  }
  template <int K> TJ<K> u0() const {
    TJ<K> acc(1.0);
    for (int a = 0; a < 3; ++a) {
      TJ<K> ua = u<K>(a);
      acc = acc + ua * ua;
    }
    return sqrt(acc);
  }
  // four-velocity, upper and lower
  template <int K> Vec4<TJ<K>> u4() const {
    return {u0<K>(), u<K>(0), u<K>(1), u<K>(2)};
  }
  template <int K> Vec4<TJ<K>> u4_lower() const { return lower(u4<K>()); }

  // --- first spatial derivatives (numeric), orders <= 2 --------------------
  template <int K> TJ<K> Dh(int a) const {
    static_assert(K <= 2);
    return slots<K>(X.Dh[a], X.DTh[a], X.DT2h[a]);
  }
  template <int K> TJ<K> Ds(int a) const {
    static_assert(K <= 2);
    return slots<K>(X.Ds[a], X.DTs[a], X.DT2s[a]);
  }
  template <int K> TJ<K> Du(int b, int a) const {
    static_assert(K <= 2);
    return slots<K>(X.Du[b][a], X.DTu[b][a], X.DT2u[b][a]);
  }
  template <int K> TJ<K> Du0(int a) const {
    static_assert(K <= 2);
    TJ<K> acc(0.0);
    for (int b = 0; b < 3; ++b) acc = acc + u<K>(b) * Du<K>(b, a);
    return acc / u0<K>();
  }

  // --- second spatial derivatives (numeric), order <= 1 ---------------------
  template <int K> TJ<K> DDh(int a, int b) const {
    static_assert(K <= 1);
    return slots2<K>(X.DDh[sym6(a, b)], X.DDTh[sym6(a, b)]);
  }
  template <int K> TJ<K> DDs(int a, int b) const {
    static_assert(K <= 1);
    return slots2<K>(X.DDs[sym6(a, b)], X.DDTs[sym6(a, b)]);
  }
  template <int K> TJ<K> DDu(int c, int a, int b) const {
    static_assert(K <= 1);
    return slots2<K>(X.DDu[c][sym6(a, b)], X.DDTu[c][sym6(a, b)]);
  }
  template <int K> TJ<K> DDu0(int a, int b) const {
    static_assert(K <= 1);
    TJ<K> acc(0.0);
    for (int c = 0; c < 3; ++c)
      acc = acc + Du<K>(c, b) * Du<K>(c, a) + u<K>(c) * DDu<K>(c, a, b);
    return (acc - Du0<K>(a) * Du0<K>(b)) / u0<K>();
  }

  // --- spacetime gradients, d[lambda] of scalars ----------------------------
  // dh(lambda): lambda = 0 is the closure time derivative.
  template <int K> TJ<K> dh(int lam) const {
    return lam == 0 ? tshift(h<K + 1>()) : Dh<K>(lam - 1);
  }
  template <int K> TJ<K> ds(int lam) const {
    return lam == 0 ? tshift(s<K + 1>()) : Ds<K>(lam - 1);
  }
  // du(kappa^upper, lambda): d_lambda u^kappa.
  template <int K> TJ<K> du(int kap, int lam) const {
    if (kap == 0) return lam == 0 ? tshift(u0<K + 1>()) : Du0<K>(lam - 1);
    return lam == 0 ? tshift(u<K + 1>(kap - 1)) : Du<K>(kap - 1, lam - 1);
  }
  template <int K> TJ<K> du_lower(int kap, int lam) const {
    TJ<K> v = du<K>(kap, lam);
    return kap == 0 ? -v : v;
  }
  template <int K> TJ<K> div_u() const {
    TJ<K> acc = du<K>(0, 0);
    for (int a = 1; a < 4; ++a) acc = acc + du<K>(a, a);
    return acc;
  }

  // --- entropy gradient -----------------------------------------------------
  template <int K> TJ<K> S_lower(int alpha) const { return ds<K>(alpha); }
  template <int K> TJ<K> S_upper(int alpha) const {
    TJ<K> v = ds<K>(alpha);
    return alpha == 0 ? -v : v;
  }
  // d_lambda S_delta (symmetric by construction).
  template <int K> TJ<K> dS_lower(int lam, int del) const {
    static_assert(K <= 1);
    if (lam == 0 && del == 0) return tshift(tshift(s<K + 2>()));
    if (lam == 0) return tshift(Ds<K + 1>(del - 1));
    if (del == 0) return tshift(Ds<K + 1>(lam - 1));
    return DDs<K>(lam - 1, del - 1);
  }
  template <int K> TJ<K> dS_upper(int lam, int del) const {
    TJ<K> v = dS_lower<K>(lam, del);
    return del == 0 ? -v : v;
  }
  template <int K> TJ<K> div_S() const {
    TJ<K> acc = dS_upper<K>(0, 0);
    for (int a = 1; a < 4; ++a) acc = acc + dS_upper<K>(a, a);
    return acc;
  }

  // --- thermodynamics (templated closed forms) ------------------------------
  template <int K> TJ<K> csq() const { return X.base.eos.csq(h<K>(), s<K>()); }
  template <int K> TJ<K> cspeed() const { return sqrt(csq<K>()); }
  template <int K> TJ<K> q() const { return X.base.eos.q_fn(h<K>(), s<K>()); }
  template <int K> TJ<K> theta() const { return X.base.eos.theta_fn(h<K>(), s<K>()); }
  template <int K> TJ<K> nn() const { return X.base.eos.n0(h<K>(), s<K>()); }
  template <int K> TJ<K> Hent() const { return X.base.eos.enthalpy(h<K>()); }

  // d/dh of theta as a jet (exact, via an (h,s) jet over the time jet).
  template <int K> TJ<K> theta_h() const {
    using JT = J2<TJ<K>>;
    const TJ<K> one(1.0), zero(0.0);
    JT hj{h<K>(), one, zero};
    JT sj{s<K>(), zero, one};
    return X.base.eos.theta_fn(hj, sj).dh;
  }

  // --- H u_flat and the vorticity -------------------------------------------
  template <int K> Vec4<TJ<K>> hu_lower() const {
    Vec4<TJ<K>> r;
    const TJ<K> H = Hent<K>();
    const Vec4<TJ<K>> ul = u4_lower<K>();
    for (int d = 0; d < 4; ++d) r[d] = H * ul[d];
    return r;
  }
  // d_gamma (H u_flat)_delta; numeric in space, analytic in time.
  template <int K> TJ<K> dHU(int gam, int del) const {
    static_assert(K <= 2);
    if (gam == 0) return tshift(hu_lower<K + 1>()[del]);
    return slots<K>(X.DHU[del][gam - 1], X.DTHU[del][gam - 1], X.DT2HU[del][gam - 1]);
  }
  template <int K> Vec4<TJ<K>> varpi() const {
    static_assert(K <= 2);
    Vec4<TJ<K>> r{TJ<K>(0.0), TJ<K>(0.0), TJ<K>(0.0), TJ<K>(0.0)};
    const Vec4<TJ<K>> ul = u4_lower<K>();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int d = 0; d < 4; ++d) {
            const int e = eps4_upper(a, b, g, d);
            if (e) r[a] = r[a] - double(e) * ul[b] * dHU<K>(g, d);
          }
    return r;
  }
  // d_gamma varpi^alpha.
  template <int K> TJ<K> dvarpi_upper(int gam, int alpha) const {
    static_assert(K <= 1);
    if (gam == 0) return tshift(varpi<K + 1>()[alpha]);
    return slots2<K>(X.Dvarpi[alpha][gam - 1], X.DTvarpi[alpha][gam - 1]);
  }
  template <int K> TJ<K> dvarpi_lower(int gam, int del) const {
    TJ<K> v = dvarpi_upper<K>(gam, del);
    return del == 0 ? -v : v;
  }
  // vort^alpha(varpi_flat).
  template <int K> Vec4<TJ<K>> vort_varpi() const {
    static_assert(K <= 1);
    Vec4<TJ<K>> r{TJ<K>(0.0), TJ<K>(0.0), TJ<K>(0.0), TJ<K>(0.0)};
    const Vec4<TJ<K>> ul = u4_lower<K>();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int d = 0; d < 4; ++d) {
            const int e = eps4_upper(a, b, g, d);
            if (e) r[a] = r[a] - double(e) * ul[b] * dvarpi_lower<K>(g, d);
          }
    return r;
  }

  // --- modified fluid variables ---------------------------------------------
  // C^alpha = vort(varpi) + c^-2 eps u dh varpi
  //           + (theta - theta_h) { S^alpha div u + u^alpha (S.dh)
  //                                 - S^kappa eta^{alpha lam} d_lam u_kappa }.
  template <int K> Vec4<TJ<K>> Cmod() const {
    static_assert(K <= 1);
    Vec4<TJ<K>> r = vort_varpi<K>();
    const Vec4<TJ<K>> ul = u4_lower<K>();
    const Vec4<TJ<K>> uu = u4<K>();
    const Vec4<TJ<K>> w = varpi<K>();
    const Vec4<TJ<K>> wl = lower(w);
    const TJ<K> ic2 = 1.0 / csq<K>();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g)
          for (int d = 0; d < 4; ++d) {
            const int e = eps4_upper(a, b, g, d);
            if (e) r[a] = r[a] + double(e) * ic2 * ul[b] * dh<K>(g) * wl[d];
          }
    const TJ<K> coeff = theta<K>() - theta_h<K>();
    const TJ<K> divu = div_u<K>();
    TJ<K> Sdh(0.0);
    for (int k = 0; k < 4; ++k) Sdh = Sdh + S_upper<K>(k) * dh<K>(k);
    for (int a = 0; a < 4; ++a) {
      r[a] = r[a] + coeff * S_upper<K>(a) * divu + coeff * uu[a] * Sdh;
      // eta^{alpha lam} d_lam u_kappa is diagonal in lam.
      TJ<K> contr(0.0);
      for (int k = 0; k < 4; ++k)
        contr = contr + S_upper<K>(k) * (eta_diag(a) * du_lower<K>(k, a));
      r[a] = r[a] - coeff * contr;
    }
    return r;
  }

  // D = n^-1 div S + n^-1 (1 - c^-2) S^kappa d_kappa h.
  template <int K> TJ<K> Dmod() const {
    static_assert(K <= 1);
    const TJ<K> in = 1.0 / nn<K>();
    TJ<K> Sdh(0.0);
    for (int k = 0; k < 4; ++k) Sdh = Sdh + S_upper<K>(k) * dh<K>(k);
    return in * div_S<K>() + in * (1.0 - 1.0 / csq<K>()) * Sdh;
  }

  // --- raw slot readers ------------------------------------------------------
  template <int K>
  TJ<K> fund(const ScalarField& v, const ScalarField& t1, const ScalarField& t2,
             const ScalarField& t3) const {
    TJ<K> r;
    r.c[0] = v[i];
    if constexpr (K >= 1) r.c[1] = t1[i];
    if constexpr (K >= 2) r.c[2] = t2[i];
    if constexpr (K >= 3) r.c[3] = t3[i];
    return r;
  }
  template <int K>
  TJ<K> slots(const ScalarField& v, const ScalarField& t1, const ScalarField& t2) const {
    TJ<K> r;
    r.c[0] = v[i];
    if constexpr (K >= 1) r.c[1] = t1[i];
    if constexpr (K >= 2) r.c[2] = t2[i];
    return r;
  }
  template <int K>
  TJ<K> slots2(const ScalarField& v, const ScalarField& t1) const {
    TJ<K> r;
    r.c[0] = v[i];
    if constexpr (K >= 1) r.c[1] = t1[i];
    return r;
  }
};

}  // namespace anl
