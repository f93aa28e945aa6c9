#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "anl/fluid.hpp"
#include "anl/initdata.hpp"
#include "anl/state_point.hpp"
#include "anl/tensor.hpp"

using namespace anl;

namespace {
std::shared_ptr<const TorusGrid> make_grid(int n) {
  return std::make_shared<TorusGrid>(n, n, n);
}
FluidState random_state(int n, std::uint64_t seed, const EosParams& eos,
                        double amp = 0.03) {
  auto recipe = InitialDataRecipe::random(seed, 3, amp, amp, amp);
  return realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
}
}  // namespace

TEST_CASE("constant state: everything derived vanishes") {
  auto st = FluidState::constant(make_grid(8), EosParams::variable_c(0.8, 0.2), 0.05, -0.02);
  ExtendedState X = complete_state(st);
  for (std::int64_t i = 0; i < st.h.size(); ++i) {
    CHECK(X.u0[i] == 1.0);
    CHECK(std::abs(X.Th[i]) < 1e-14);
    CHECK(std::abs(X.Ts[i]) < 1e-14);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(X.Tu[a][i]) < 1e-14);
    for (int d = 0; d < 4; ++d) {
      CHECK(std::abs(X.varpi[d][i]) < 1e-13);
      CHECK(std::abs(X.Cmod[d][i]) < 1e-13);
    }
    CHECK(std::abs(X.Dcal[i]) < 1e-13);
    CHECK(std::abs(X.Ts[i]) < 1e-14);  // S_0
    for (int a = 0; a < 3; ++a) CHECK(std::abs(X.Ds[a][i]) < 1e-13);
  }
}

TEST_CASE("entropy-layer state with theta = 0: varpi = 0 and D = div S / n") {
  // A(s), B(s) constant makes theta vanish identically, so the modified
  // divergence reduces to n^-1 d_1 S^1 exactly on an s(x^1) layer at rest.
  EosParams eos = EosParams::variable_c(0.8, 0.1, Polynomial{{1.0}}, Polynomial{{0.0}});
  auto g = make_grid(16);
  FluidState st = FluidState::constant(g, eos, 0.0, 0.0);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      for (int k = 0; k < g->n3; ++k)
        st.s[g->index(i, j, k)] = 0.1 * std::sin(g->point(i, j, k)[0]);
  ExtendedState X = complete_state(st);
  auto d1s = partial_derivative(st.s, 1);
  auto d11s = partial_derivative(d1s, 1);
  for (std::int64_t i = 0; i < st.h.size(); ++i) {
    for (int d = 0; d < 4; ++d) CHECK(std::abs(X.varpi[d][i]) < 1e-12);
    const double n = eval_thermo(eos, st.h[i], st.s[i]).n;
    CHECK(X.Dcal[i] == doctest::Approx(d11s[i] / n).epsilon(1e-10));
  }
}

TEST_CASE("entropy-layer state with generic theta: the q |S|^2 closure term appears") {
  // With temperature present, dt S^0 = q |S|^2 contributes to div S; the
  // hand-evaluated value of D picks it up.
  EosParams eos = EosParams::variable_c(0.8, 0.1);
  auto g = make_grid(16);
  FluidState st = FluidState::constant(g, eos, 0.0, 0.0);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      for (int k = 0; k < g->n3; ++k)
        st.s[g->index(i, j, k)] = 0.1 * std::sin(g->point(i, j, k)[0]);
  ExtendedState X = complete_state(st);
  auto d1s = partial_derivative(st.s, 1);
  auto d11s = partial_derivative(d1s, 1);
  for (std::int64_t i = 0; i < st.h.size(); ++i) {
    const ThermoEval t = eval_thermo(eos, st.h[i], st.s[i]);
    const double expected = (d11s[i] + t.q * d1s[i] * d1s[i]) / t.n;
    CHECK(X.Dcal[i] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("closure on a rest state with an enthalpy gradient") {
  // At rest with s constant: dt h = 0 and dt u^a = -d_a h.
  EosParams eos = EosParams::constant_c(0.8);
  auto g = make_grid(16);
  FluidState st = FluidState::constant(g, eos, 0.0, 0.1);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      for (int k = 0; k < g->n3; ++k)
        st.h[g->index(i, j, k)] = 0.05 * std::sin(g->point(i, j, k)[0]);
  ClosureRhs rhs = closure_rhs(st);
  auto d1h = partial_derivative(st.h, 1);
  for (std::int64_t i = 0; i < st.h.size(); ++i) {
    CHECK(std::abs(rhs.Th[i]) < 1e-13);
    CHECK(rhs.Tu[0][i] == doctest::Approx(-d1h[i]).epsilon(1e-12));
    CHECK(std::abs(rhs.Tu[1][i]) < 1e-13);
    CHECK(std::abs(rhs.Ts[i]) < 1e-14);
  }
}

TEST_CASE("det A0 formula") {
  // det A0 = (1 + u_a u^a)^4 (1 + (1 - c^2) u_b u^b); at rest it equals 1.
  // The solved closure must satisfy the six equations, which indirectly
  // pins the matrix; here we check the determinant through the solve's
  // consistency on random data against the row evaluation.
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(12, 77, eos);
  ExtendedState X = complete_state(st);
  // Row check: u^k d_k h + c^2 div u = 0 pointwise with the solved slots.
  for (std::int64_t i = 0; i < st.h.size(); i += 7) {
    PointView p(X, i);
    const double c2 = eos.csq(st.h[i], st.s[i]);
    double lhs = X.u0[i] * X.Th[i];
    for (int a = 0; a < 3; ++a) lhs += st.u[a][i] * X.Dh[a][i];
    double divu = p.du<0>(0, 0).c[0];
    for (int a = 1; a < 4; ++a) divu += p.du<0>(a, a).c[0];
    lhs += c2 * divu;
    CHECK(std::abs(lhs) < 1e-12);
  }
}

TEST_CASE("constraint and orthogonality invariants on a random smooth state") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(16, 3, eos);
  ExtendedState X = complete_state(st);
  CHECK(X.max_constraint_defect < 1e-10);
  CHECK(X.max_varpi_u_defect < 1e-10);
  CHECK(X.max_closure_u0_defect < 1e-10);

  // u^k S_k = 0 to roundoff: S_0 is the closure dt s.
  for (std::int64_t i = 0; i < st.h.size(); i += 11) {
    double uS = X.u0[i] * X.Ts[i];
    for (int a = 0; a < 3; ++a) uS += st.u[a][i] * X.Ds[a][i];
    CHECK(std::abs(uS) < 1e-13);
  }
}

TEST_CASE("closure consistency: mixed derivatives commute by construction") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(12, 5, eos);
  ExtendedState X = complete_state(st);
  // d_a (dt h) and dt (d_a h) are the same stored field.
  auto d1Th = partial_derivative(X.Th, 1);
  for (std::int64_t i = 0; i < st.h.size(); i += 13)
    CHECK(d1Th[i] == doctest::Approx(X.DTh[0][i]).epsilon(1e-12));
}

TEST_CASE("vort operator basics") {
  EosParams eos = EosParams::constant_c(0.9);
  auto g = make_grid(16);
  FluidState st = FluidState::constant(g, eos, 0.0, 0.0);
  ExtendedState X = complete_state(st);

  // V an exact spatial gradient at rest: vort(V) = 0 to discretization error.
  ScalarField f = sample(g, [](double x, double y, double) { return std::sin(x + y); });
  std::array<ScalarField, 4> V{ScalarField(g), partial_derivative(f, 1),
                               partial_derivative(f, 2), partial_derivative(f, 3)};
  std::array<ScalarField, 4> dtV{ScalarField(g), ScalarField(g), ScalarField(g),
                                 ScalarField(g)};
  auto w = vort_operator(X, V, &dtV);
  for (int d = 0; d < 4; ++d) CHECK(linf_norm(w[d]) < 1e-11);

  CHECK_THROWS_AS(vort_operator(X, V, nullptr), std::invalid_argument);
}

TEST_CASE("vort of H u_flat reproduces the stored vorticity") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(16, 21, eos);
  ExtendedState X = complete_state(st);
  auto w = vort_operator(X, X.HU, &X.THU);
  for (int d = 0; d < 4; ++d) {
    double err = 0;
    for (std::int64_t i = 0; i < st.h.size(); ++i)
      err = std::max(err, std::abs(w[d][i] - X.varpi[d][i]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("u_k vort^k(V) = 0 for random one-forms") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(12, 31, eos);
  ExtendedState X = complete_state(st);
  auto g = st.grid;
  std::array<ScalarField, 4> V, dtV;
  for (int d = 0; d < 4; ++d) {
    V[d] = sample(g, [d](double x, double y, double z) {
      return 0.1 * std::sin(x + d) + 0.05 * std::cos(y - z + d);
    });
    dtV[d] = sample(g, [d](double x, double, double z) {
      return 0.02 * std::cos(2 * x + z + d);
    });
  }
  auto w = vort_operator(X, V, &dtV);
  for (std::int64_t i = 0; i < st.h.size(); i += 17) {
    double acc = -X.u0[i] * (-w[0][i]);  // u_0 w^0 = -u^0 w^0
    acc = -X.u0[i] * w[0][i];
    for (int a = 0; a < 3; ++a) acc += st.u[a][i] * w[a + 1][i];
    CHECK(std::abs(acc) < 1e-12);
  }
}

TEST_CASE("region exit raises with offending points") {
  EosParams eos = EosParams::constant_c(0.9);
  auto g = make_grid(8);
  FluidState st = FluidState::constant(g, eos, 0.0, 0.0);
  st.h[5] = 2.0;  // outside the default box
  CHECK_THROWS_AS(complete_state(st), RegionExitError);
  try {
    complete_state(st);
  } catch (const RegionExitError& e) {
    REQUIRE(e.offending_points.size() == 1);
    CHECK(e.offending_points[0] == 5);
  }
}

TEST_CASE("reconstruction: G^-1 contracted gradients reduce to hyperbolic data") {
  // (G^-1)^{cd} d_c S_d and (G^-1)^{cd} d_c varpi_d equal expressions in the
  // undifferentiated state once the time derivative of the zeroth component
  // is eliminated through the transport equations and the orthogonality
  // closures. Discretely this holds up to product-rule error, so the
  // residual must decay under refinement.
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  double errS[2], errW[2];
  int idx = 0;
  for (int n : {16, 32}) {
    FluidState st = random_state(n, 8, eos);
    ExtendedState X = complete_state(st);
    double eS = 0, eW = 0;
    for (std::int64_t i = 0; i < st.h.size(); ++i) {
      PointView p(X, i);
      const ThermoEval t = eval_thermo(eos, st.h[i], st.s[i]);
      const double u0 = X.u0[i];
      double u[3] = {st.u[0][i], st.u[1][i], st.u[2][i]};
      double du0[3];
      for (int a = 0; a < 3; ++a) du0[a] = p.Du0<0>(a).c[0];
      double uDu0 = u[0] * du0[0] + u[1] * du0[1] + u[2] * du0[2];

      // --- entropy gradient version ---
      double lhsS = 0, uSj = 0, uSDu = 0;
      for (int c = 0; c < 3; ++c) {
        uSj += u[c] * X.Ds[c][i];
        for (int dd = 0; dd < 3; ++dd) {
          const double Ginv = (c == dd ? 1.0 : 0.0) - u[c] * u[dd] / (u0 * u0);
          lhsS += Ginv * X.DDs[sym6(c, dd)][i];
          uSDu += u[c] * X.Ds[dd][i] * X.Du[dd][c][i];
        }
      }
      double Sdh = -X.Ts[i] * X.Th[i];
      for (int a = 0; a < 3; ++a) Sdh += X.Ds[a][i] * X.Dh[a][i];
      double SkTu = X.Ts[i] * p.du<0>(0, 0).c[0];  // S_0 dt u^0
      for (int a = 0; a < 3; ++a) SkTu += X.Ds[a][i] * X.Tu[a][i];
      const double fS = t.n * X.Dcal[i] - (1.0 - 1.0 / (t.c * t.c)) * Sdh -
                        SkTu / u0 + uSDu / (u0 * u0) - uSj * uDu0 / (u0 * u0 * u0);
      eS = std::max(eS, std::abs(lhsS - fS));

      // --- vorticity version ---
      double lhsW = 0, uWj = 0, uWDu = 0;
      for (int c = 0; c < 3; ++c) {
        uWj += u[c] * X.varpi[c + 1][i];
        for (int dd = 0; dd < 3; ++dd) {
          const double Ginv = (c == dd ? 1.0 : 0.0) - u[c] * u[dd] / (u0 * u0);
          lhsW += Ginv * X.Dvarpi[dd + 1][c][i];
          uWDu += u[c] * X.varpi[dd + 1][i] * X.Du[dd][c][i];
        }
      }
      double wdh = 0, wS = 0;
      for (int k = 0; k < 4; ++k) {
        const double dh = k == 0 ? X.Th[i] : X.Dh[k - 1][i];
        const double Sl = k == 0 ? X.Ts[i] : X.Ds[k - 1][i];
        wdh += X.varpi[k][i] * dh;
        wS += X.varpi[k][i] * Sl;
      }
      // transport RHS for varpi^0
      double rhs0 = -u0 * wdh - X.varpi[0][i] * (p.div_u<0>().c[0]) + t.q * u0 * wS;
      for (int k = 0; k < 4; ++k) rhs0 += X.varpi[k][i] * p.du<0>(0, k).c[0];
      {
        double eps_term = 0;
        for (int b = 0; b < 4; ++b)
          for (int gm = 0; gm < 4; ++gm)
            for (int dd = 0; dd < 4; ++dd) {
              const int e = eps4_upper(0, b, gm, dd);
              if (!e) continue;
              const double ul = (b == 0 ? -u0 : u[b - 1]);
              const double dh = gm == 0 ? X.Th[i] : X.Dh[gm - 1][i];
              const double Sl = dd == 0 ? X.Ts[i] : X.Ds[dd - 1][i];
              eps_term += double(e) * ul * dh * Sl;
            }
        rhs0 += (t.theta - t.theta_h) * eps_term;
      }
      const double fW = (-wdh + 2.0 * t.q * wS) - rhs0 / u0 + uWDu / (u0 * u0) -
                        uWj * uDu0 / (u0 * u0 * u0);
      eW = std::max(eW, std::abs(lhsW - fW));
    }
    errS[idx] = eS;
    errW[idx] = eW;
    ++idx;
  }
  CHECK(errS[0] / std::max(errS[1], 1e-300) > 1e2);
  CHECK(errW[0] / std::max(errW[1], 1e-300) > 1e2);
}
