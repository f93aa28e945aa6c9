#include "anl/fluid.hpp"

#include <cmath>
#include <sstream>

#include "anl/state_point.hpp"

namespace anl {

namespace {

// The 6x6 coefficient matrix A^0 of the first-order system in the unknown
// order (h, u^0, u^1, u^2, u^3, s).
std::array<std::array<double, 6>, 6> a0_matrix(double u0, const double u[3], double csq,
                                               double q) {
  std::array<std::array<double, 6>, 6> A{};
  const double uau = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  A[0][0] = u0;
  A[0][1] = csq;
  A[1][0] = uau;
  A[1][1] = u0;
  A[1][5] = q;
  for (int a = 0; a < 3; ++a) {
    A[2 + a][0] = u0 * u[a];
    A[2 + a][2 + a] = u0;
  }
  A[5][5] = u0;
  return A;
}

// Rows of A^alpha d_alpha (h, u^0, u^a, s) evaluated in any scalar/jet type.
// Row 0: enthalpy evolution; rows 1..4: velocity evolution (Pi-form, with
// Pi^{00} replaced by u_a u^a via the constraint); row 5: entropy transport.
template <class T>
std::array<T, 6> euler_rows(const T& u0, const std::array<T, 3>& u, const T& csq, const T& q,
                            const T& dth, const T& dtu0, const std::array<T, 3>& dtu,
                            const T& dts, const std::array<T, 3>& Dh,
                            const std::array<T, 3>& Du0,
                            const std::array<std::array<T, 3>, 3>& Du,
                            const std::array<T, 3>& Ds) {
  std::array<T, 6> R;
  T uDh = u[0] * Dh[0] + u[1] * Dh[1] + u[2] * Dh[2];
  T divu = dtu0 + Du[0][0] + Du[1][1] + Du[2][2];
  R[0] = u0 * dth + uDh + csq * divu;

  T uau = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  T uDu0 = u[0] * Du0[0] + u[1] * Du0[1] + u[2] * Du0[2];
  R[1] = uau * dth + u0 * dtu0 + uDu0 + u0 * uDh + q * dts;

  for (int a = 0; a < 3; ++a) {
    T uDua = u[0] * Du[a][0] + u[1] * Du[a][1] + u[2] * Du[a][2];
    R[2 + a] = u0 * dtu[a] + uDua + u[a] * u0 * dth + Dh[a] + u[a] * uDh - q * Ds[a];
  }
  R[5] = u0 * dts + u[0] * Ds[0] + u[1] * Ds[1] + u[2] * Ds[2];
  return R;
}

std::array<ScalarField, 3> grad(const ScalarField& f) {
  return {partial_derivative(f, 1), partial_derivative(f, 2), partial_derivative(f, 3)};
}

std::array<ScalarField, 6> hess_from_grad(const std::array<ScalarField, 3>& g) {
  std::array<ScalarField, 6> h;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) h[sym6(a, b)] = partial_derivative(g[a], b + 1);
  return h;
}

}  // namespace

FluidState FluidState::constant(std::shared_ptr<const TorusGrid> grid, const EosParams& eos,
                                double h0, double s0, std::array<double, 3> u0) {
  FluidState st;
  st.grid = grid;
  st.eos = eos;
  st.h = ScalarField(grid, h0);
  st.s = ScalarField(grid, s0);
  for (int a = 0; a < 3; ++a) st.u[a] = ScalarField(grid, u0[a]);
  return st;
}

std::vector<std::int64_t> region_violations(const FluidState& raw) {
  std::vector<std::int64_t> out;
  const std::int64_t n = raw.h.size();
  for (std::int64_t i = 0; i < n; ++i)
    if (!raw.region.contains(raw.h[i], raw.s[i], raw.u[0][i], raw.u[1][i], raw.u[2][i]))
      out.push_back(i);
  return out;
}

ClosureRhs closure_rhs(const FluidState& raw) {
  auto viol = region_violations(raw);
  if (!viol.empty()) {
    std::ostringstream msg;
    msg << "closure_rhs: state left the hyperbolicity box at " << viol.size()
        << " grid points (first index " << viol.front() << ")";
    throw RegionExitError(msg.str(), std::move(viol));
  }
  auto Dh = grad(raw.h);
  auto Ds = grad(raw.s);
  std::array<std::array<ScalarField, 3>, 3> Du;
  for (int b = 0; b < 3; ++b) Du[b] = grad(raw.u[b]);

  ClosureRhs out;
  out.Th = ScalarField(raw.grid);
  out.Ts = ScalarField(raw.grid);
  for (int a = 0; a < 3; ++a) out.Tu[a] = ScalarField(raw.grid);

  const std::int64_t n = raw.h.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double u[3] = {raw.u[0][i], raw.u[1][i], raw.u[2][i]};
    const double u0 = std::sqrt(1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    const double csq = raw.eos.csq(raw.h[i], raw.s[i]);
    const double q = raw.eos.q_fn(raw.h[i], raw.s[i]);
    std::array<double, 6> b{};
    // Spatial part of the rows; chain-rule gradient for u^0.
    std::array<double, 3> dh{Dh[0][i], Dh[1][i], Dh[2][i]};
    std::array<double, 3> ds{Ds[0][i], Ds[1][i], Ds[2][i]};
    std::array<std::array<double, 3>, 3> du;
    std::array<double, 3> du0;
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < 3; ++j) du[a][j] = Du[a][j][i];
    }
    for (int j = 0; j < 3; ++j)
      du0[j] = (u[0] * du[0][j] + u[1] * du[1][j] + u[2] * du[2][j]) / u0;
    auto rows = euler_rows<double>(u0, {u[0], u[1], u[2]}, csq, q, 0.0, 0.0, {0.0, 0.0, 0.0},
                                   0.0, dh, du0, du, ds);
    for (int r = 0; r < 6; ++r) b[r] = -rows[r];
    auto x = solve6(a0_matrix(u0, u, csq, q), b);
    out.Th[i] = x[0];
    out.Tu[0][i] = x[2];
    out.Tu[1][i] = x[3];
    out.Tu[2][i] = x[4];
    out.Ts[i] = x[5];
  }
  return out;
}

ExtendedState complete_state(const FluidState& raw) {
  ExtendedState X;
  X.base = raw;
  auto viol = region_violations(raw);
  if (!viol.empty()) {
    std::ostringstream msg;
    msg << "complete_state: state left the hyperbolicity box at " << viol.size()
        << " grid points (first index " << viol.front() << ")";
    throw RegionExitError(msg.str(), std::move(viol));
  }
  auto g = raw.grid;
  const std::int64_t n = raw.h.size();

  // Numeric derivatives of the fundamentals.
  X.Dh = grad(raw.h);
  X.Ds = grad(raw.s);
  for (int b = 0; b < 3; ++b) X.Du[b] = grad(raw.u[b]);
  X.DDh = hess_from_grad(X.Dh);
  X.DDs = hess_from_grad(X.Ds);
  for (int b = 0; b < 3; ++b) X.DDu[b] = hess_from_grad(X.Du[b]);

  X.u0 = ScalarField(g);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    X.u0[i] = std::sqrt(1.0 + raw.u[0][i] * raw.u[0][i] + raw.u[1][i] * raw.u[1][i] +
                        raw.u[2][i] * raw.u[2][i]);

  // Closure stage 1, plus the solved-vs-chain-rule u^0 diagnostic.
  {
    ClosureRhs rhs = closure_rhs(raw);
    X.Th = std::move(rhs.Th);
    X.Ts = std::move(rhs.Ts);
    X.Tu = std::move(rhs.Tu);
  }
  double u0_defect = 0.0;
#pragma omp parallel for schedule(static) reduction(max : u0_defect)
  for (std::int64_t i = 0; i < n; ++i) {
    const double chain = (raw.u[0][i] * X.Tu[0][i] + raw.u[1][i] * X.Tu[1][i] +
                          raw.u[2][i] * X.Tu[2][i]) /
                         X.u0[i];
    // Re-derive the solved dt u^0 from row 0 of the system.
    const double csq = raw.eos.csq(raw.h[i], raw.s[i]);
    const double udh = raw.u[0][i] * X.Dh[0][i] + raw.u[1][i] * X.Dh[1][i] +
                       raw.u[2][i] * X.Dh[2][i];
    const double divsp = X.Du[0][0][i] + X.Du[1][1][i] + X.Du[2][2][i];
    const double solved = -(X.u0[i] * X.Th[i] + udh) / csq - divsp;
    u0_defect = std::max(u0_defect, std::abs(solved - chain));
  }
  X.max_closure_u0_defect = u0_defect;

  X.DTh = grad(X.Th);
  X.DTs = grad(X.Ts);
  for (int b = 0; b < 3; ++b) X.DTu[b] = grad(X.Tu[b]);
  X.DDTh = hess_from_grad(X.DTh);
  X.DDTs = hess_from_grad(X.DTs);
  for (int b = 0; b < 3; ++b) X.DDTu[b] = hess_from_grad(X.DTu[b]);

  // Stage 2: second time derivatives from the once-differentiated system.
  X.T2h = ScalarField(g);
  X.T2s = ScalarField(g);
  for (int a = 0; a < 3; ++a) X.T2u[a] = ScalarField(g);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    using T = TJ<1>;
    const T u0j = p.u0<1>();
    const std::array<T, 3> uj{p.u<1>(0), p.u<1>(1), p.u<1>(2)};
    const T dth = T::make(X.Th[i]);
    const T dts = T::make(X.Ts[i]);
    const T dtu0 = T::make(u0j.c[1]);
    const std::array<T, 3> dtu{T::make(X.Tu[0][i]), T::make(X.Tu[1][i]),
                               T::make(X.Tu[2][i])};
    std::array<T, 3> Dhj{p.Dh<1>(0), p.Dh<1>(1), p.Dh<1>(2)};
    std::array<T, 3> Dsj{p.Ds<1>(0), p.Ds<1>(1), p.Ds<1>(2)};
    std::array<T, 3> Du0j{p.Du0<1>(0), p.Du0<1>(1), p.Du0<1>(2)};
    std::array<std::array<T, 3>, 3> Duj;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) Duj[b][a] = p.Du<1>(b, a);
    auto rows = euler_rows<T>(u0j, uj, p.csq<1>(), p.q<1>(), dth, dtu0, dtu, dts, Dhj, Du0j,
                              Duj, Dsj);
    std::array<double, 6> b2{};
    for (int r = 0; r < 6; ++r) b2[r] = -rows[r].c[1];
    const double u[3] = {raw.u[0][i], raw.u[1][i], raw.u[2][i]};
    auto x = solve6(a0_matrix(X.u0[i], u, raw.eos.csq(raw.h[i], raw.s[i]), raw.eos.q_fn(raw.h[i], raw.s[i])), b2);
    X.T2h[i] = x[0];
    X.T2u[0][i] = x[2];
    X.T2u[1][i] = x[3];
    X.T2u[2][i] = x[4];
    X.T2s[i] = x[5];
  }
  X.DT2h = grad(X.T2h);
  X.DT2s = grad(X.T2s);
  for (int b = 0; b < 3; ++b) X.DT2u[b] = grad(X.T2u[b]);

  // Stage 3: third time derivatives from the twice-differentiated system.
  X.T3h = ScalarField(g);
  X.T3s = ScalarField(g);
  for (int a = 0; a < 3; ++a) X.T3u[a] = ScalarField(g);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    using T = TJ<2>;
    const T u0j = p.u0<2>();
    const std::array<T, 3> uj{p.u<2>(0), p.u<2>(1), p.u<2>(2)};
    const T dth = T::make(X.Th[i], X.T2h[i]);
    const T dts = T::make(X.Ts[i], X.T2s[i]);
    const T dtu0 = T::make(u0j.c[1], u0j.c[2]);
    const std::array<T, 3> dtu{T::make(X.Tu[0][i], X.T2u[0][i]),
                               T::make(X.Tu[1][i], X.T2u[1][i]),
                               T::make(X.Tu[2][i], X.T2u[2][i])};
    std::array<T, 3> Dhj{p.Dh<2>(0), p.Dh<2>(1), p.Dh<2>(2)};
    std::array<T, 3> Dsj{p.Ds<2>(0), p.Ds<2>(1), p.Ds<2>(2)};
    std::array<T, 3> Du0j{p.Du0<2>(0), p.Du0<2>(1), p.Du0<2>(2)};
    std::array<std::array<T, 3>, 3> Duj;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) Duj[b][a] = p.Du<2>(b, a);
    auto rows = euler_rows<T>(u0j, uj, p.csq<2>(), p.q<2>(), dth, dtu0, dtu, dts, Dhj, Du0j,
                              Duj, Dsj);
    std::array<double, 6> b3{};
    for (int r = 0; r < 6; ++r) b3[r] = -rows[r].c[2];
    const double u[3] = {raw.u[0][i], raw.u[1][i], raw.u[2][i]};
    auto x = solve6(a0_matrix(X.u0[i], u, raw.eos.csq(raw.h[i], raw.s[i]), raw.eos.q_fn(raw.h[i], raw.s[i])), b3);
    X.T3h[i] = x[0];
    X.T3u[0][i] = x[2];
    X.T3u[1][i] = x[3];
    X.T3u[2][i] = x[4];
    X.T3s[i] = x[5];
  }

  // H u_flat and its analytic time derivatives, then numeric gradients.
  for (int d = 0; d < 4; ++d) {
    X.HU[d] = ScalarField(g);
    X.THU[d] = ScalarField(g);
    X.T2HU[d] = ScalarField(g);
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    auto hu = p.hu_lower<3>();
    for (int d = 0; d < 4; ++d) {
      X.HU[d][i] = hu[d].c[0];
      X.THU[d][i] = hu[d].c[1];
      X.T2HU[d][i] = hu[d].c[2];
    }
  }
  for (int d = 0; d < 4; ++d) {
    X.DHU[d] = grad(X.HU[d]);
    X.DTHU[d] = grad(X.THU[d]);
    X.DT2HU[d] = grad(X.T2HU[d]);
  }

  // Vorticity and its analytic time derivative, then numeric gradients.
  for (int d = 0; d < 4; ++d) {
    X.varpi[d] = ScalarField(g);
    X.Tvarpi[d] = ScalarField(g);
  }
  double wu_defect = 0.0;
#pragma omp parallel for schedule(static) reduction(max : wu_defect)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    auto w = p.varpi<2>();
    for (int d = 0; d < 4; ++d) {
      X.varpi[d][i] = w[d].c[0];
      X.Tvarpi[d][i] = w[d].c[1];
    }
    const double wdotu = -w[0].c[0] * X.u0[i] + w[1].c[0] * raw.u[0][i] +
                         w[2].c[0] * raw.u[1][i] + w[3].c[0] * raw.u[2][i];
    wu_defect = std::max(wu_defect, std::abs(wdotu));
  }
  X.max_varpi_u_defect = wu_defect;
  for (int d = 0; d < 4; ++d) {
    X.Dvarpi[d] = grad(X.varpi[d]);
    X.DTvarpi[d] = grad(X.Tvarpi[d]);
  }

  // Modified variables.
  for (int d = 0; d < 4; ++d) X.Cmod[d] = ScalarField(g);
  X.Dcal = ScalarField(g);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PointView p(X, i);
    auto c = p.Cmod<1>();
    for (int d = 0; d < 4; ++d) X.Cmod[d][i] = c[d].c[0];
    X.Dcal[i] = p.Dmod<1>().c[0];
  }
  for (int d = 0; d < 4; ++d) X.DCmod[d] = grad(X.Cmod[d]);
  X.DDcal = grad(X.Dcal);

  double cdef = 0.0;
  const std::int64_t nn = n;
  for (std::int64_t i = 0; i < nn; ++i) {
    const double uu = -X.u0[i] * X.u0[i] + raw.u[0][i] * raw.u[0][i] +
                      raw.u[1][i] * raw.u[1][i] + raw.u[2][i] * raw.u[2][i];
    cdef = std::max(cdef, std::abs(uu + 1.0));
  }
  X.max_constraint_defect = cdef;
  return X;
}

std::array<ScalarField, 4> vort_operator(const ExtendedState& state,
                                         const std::array<ScalarField, 4>& V_lower,
                                         const std::array<ScalarField, 4>* dtV_lower) {
  if (!dtV_lower)
    throw std::invalid_argument(
        "vort_operator: dV/dt must be supplied by the closure (missing-closure)");
  std::array<std::array<ScalarField, 3>, 4> DV;
  for (int d = 0; d < 4; ++d) DV[d] = grad(V_lower[d]);
  std::array<ScalarField, 4> out;
  for (int d = 0; d < 4; ++d) out[d] = ScalarField(state.base.grid);
  const std::int64_t n = state.base.h.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double ul[4] = {-state.u0[i], state.base.u[0][i], state.base.u[1][i],
                          state.base.u[2][i]};
    for (int a = 0; a < 4; ++a) {
      double acc = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int gm = 0; gm < 4; ++gm)
          for (int d = 0; d < 4; ++d) {
            const int e = eps4_upper(a, b, gm, d);
            if (!e) continue;
            const double dV = gm == 0 ? (*dtV_lower)[d][i] : DV[d][gm - 1][i];
            acc -= double(e) * ul[b] * dV;
          }
      out[a][i] = acc;
    }
  }
  return out;
}

}  // namespace anl
