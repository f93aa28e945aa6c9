#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <iostream>

#include "anl/structure.hpp"

using namespace anl;

namespace {
std::shared_ptr<const TorusGrid> make_grid(int n, DerivMode m = DerivMode::Spectral) {
  return std::make_shared<TorusGrid>(n, n, n, m);
}
FluidState random_state(int n, std::uint64_t seed, const EosParams& eos, double amp = 0.03,
                        DerivMode m = DerivMode::Spectral) {
  auto recipe = InitialDataRecipe::random(seed, 3, amp, amp, amp);
  return realize(recipe, make_grid(n, m), eos, HyperbolicityRegion{});
}

// A g-null covector at a state point: random unit spatial direction, time
// component from the cone quadratic.
Vec4<double> null_covector(const Mat4<double>& gi, std::uint64_t& st) {
  const double z = 2.0 * detail::uniform01(st) - 1.0;
  const double ph = 6.283185307179586 * detail::uniform01(st);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double xi[3] = {r * std::cos(ph), r * std::sin(ph), z};
  const double a = gi[0][0];
  double b = 0, c = 0;
  for (int i = 0; i < 3; ++i) {
    b += gi[0][i + 1] * xi[i];
    for (int j = 0; j < 3; ++j) c += gi[i + 1][j + 1] * xi[i] * xi[j];
  }
  const double l0 = (-b + std::sqrt(b * b - a * c)) / a;
  return {l0, xi[0], xi[1], xi[2]};
}
}  // namespace

TEST_CASE("standard null forms: antisymmetry and null annihilation") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(8, 3, eos);
  ExtendedState X = complete_state(st);
  std::uint64_t rng = 99;

  for (std::int64_t i = 0; i < st.h.size(); i += 37) {
    const ThermoEval T = eval_thermo(eos, st.h[i], st.s[i]);
    const Vec4<double> u{X.u0[i], st.u[0][i], st.u[1][i], st.u[2][i]};
    const Mat4<double> gi = acoustical_inverse_metric(T.c * T.c, u);

    // dphi = dpsi: Q_{mn} = 0 exactly.
    Vec4<double> dphi{0.3, -0.2, 0.7, 0.1};
    auto nf = standard_null_forms(gi, dphi, dphi);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(nf.Qmn[a][b] == 0.0);

    // null covectors annihilate Qg.
    for (int k = 0; k < 5; ++k) {
      const Vec4<double> l = null_covector(gi, rng);
      auto nn = standard_null_forms(gi, l, l);
      CHECK(std::abs(nn.Qg) < 1e-12);
    }
  }
}

TEST_CASE("flat-case null form values by hand") {
  ThermoEval T = eval_thermo(EosParams::constant_c(1.0), 0.0, 0.0);
  const Mat4<double> gi = acoustical_inverse_metric(T.c * T.c, {1, 0, 0, 0});
  const Vec4<double> dphi{1, 0, 0, 0}, dpsi{0, 1, 0, 0};
  auto nf = standard_null_forms(gi, dphi, dpsi);
  CHECK(std::abs(nf.Qg) < 1e-15);
  CHECK(nf.Qmn[0][1] == doctest::Approx(1.0));
  CHECK(nf.Qmn[1][0] == doctest::Approx(-1.0));
}

TEST_CASE("inhomogeneous terms vanish on constant and isentropic states") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto st = FluidState::constant(make_grid(8), eos, 0.1, -0.05);
  NullFormSet f = assemble_inhomogeneous(complete_state(st));
  CHECK(linf_norm(f.Qh) < 1e-13);
  CHECK(linf_norm(f.Lh) < 1e-13);
  CHECK(linf_norm(f.Ls) < 1e-13);
  CHECK(linf_norm(f.QD) < 1e-13);
  CHECK(linf_norm(f.LD) < 1e-13);
  for (int a = 0; a < 4; ++a) {
    CHECK(linf_norm(f.Qu[a]) < 1e-13);
    CHECK(linf_norm(f.Lu[a]) < 1e-13);
    CHECK(linf_norm(f.QC[a]) < 1e-13);
    CHECK(linf_norm(f.LC[a]) < 1e-13);
  }

  // isentropic: s constant kills every S-carrying term, in particular L_(s).
  auto recipe = InitialDataRecipe::random(5, 2, 0.03, 0.0, 0.03);
  FluidState st2 = realize(recipe, make_grid(12), eos, HyperbolicityRegion{});
  NullFormSet f2 = assemble_inhomogeneous(complete_state(st2));
  CHECK(linf_norm(f2.Ls) < 1e-13);
  CHECK(linf_norm(f2.Lh) < 1e-13);
  CHECK(linf_norm(f2.QD) < 1e-13);
}

TEST_CASE("Q_(h) re-assembles from the standard null forms") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(12, 7, eos);
  ExtendedState X = complete_state(st);
  NullFormSet f = assemble_inhomogeneous(X);
  for (std::int64_t i = 0; i < st.h.size(); i += 23) {
    const ThermoEval T = eval_thermo(eos, st.h[i], st.s[i]);
    PointVals v;
    PointDerivs d;
    make_point_data(X, i, T, v, d);
    const Vec4<double> u{v.u[0], v.u[1], v.u[2], v.u[3]};
    const Mat4<double> gi = acoustical_inverse_metric(T.c * T.c, u);
    const Vec4<double> dh{d.dh[0], d.dh[1], d.dh[2], d.dh[3]};
    // piece 1: -(c_h / c) Qg(dh, dh)
    const double p1 = -(T.c_h / T.c) * standard_null_forms(gi, dh, dh).Qg;
    // piece 2: c^2 sum over ordered pairs (k,l) of Q_{kl}(du^k, du^l)
    double p2 = 0;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        Vec4<double> duk{d.du[k][0], d.du[k][1], d.du[k][2], d.du[k][3]};
        Vec4<double> dul{d.du[l][0], d.du[l][1], d.du[l][2], d.du[l][3]};
        p2 += standard_null_forms(gi, duk, dul).Qmn[k][l];
      }
    p2 *= T.c * T.c;
    CHECK(f.Qh[i] == doctest::Approx(p1 + p2).epsilon(1e-12));
  }
}

TEST_CASE("L terms are affine in the first-derivative slots") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(8, 11, eos);
  ExtendedState X = complete_state(st);
  const std::int64_t i = 123;
  const ThermoEval T = eval_thermo(eos, st.h[i], st.s[i]);
  PointVals v;
  PointDerivs d0;
  make_point_data(X, i, T, v, d0);
  auto scaled = [&](double lam) {
    PointDerivs d = d0;
    for (int a = 0; a < 4; ++a) {
      d.dh[a] *= lam;
      d.ds[a] *= lam;
      for (int b = 0; b < 4; ++b) {
        d.du[a][b] *= lam;
        d.dul[a][b] *= lam;
        d.dS[a][b] *= lam;
        d.dw[a][b] *= lam;
        d.dHU[a][b] *= lam;
      }
    }
    return eval_forms(v, d);
  };
  const Forms f0 = scaled(0.0), f1 = scaled(1.0), f2 = scaled(2.0);
  auto affine = [](double a0, double a1, double a2) {
    // a(lam) affine in lam: a2 - 2 a1 + a0 = 0. The lam = 0 part is the
    // coefficient-level content (for example S.S terms) and stays constant.
    CHECK(std::abs(a2 - 2 * a1 + a0) < 1e-10 * std::max(1.0, std::abs(a2)));
  };
  affine(f0.Lh, f1.Lh, f2.Lh);
  affine(f0.Ls, f1.Ls, f2.Ls);
  affine(f0.LD, f1.LD, f2.LD);
  for (int a = 0; a < 4; ++a) {
    affine(f0.Lu[a], f1.Lu[a], f2.Lu[a]);
    affine(f0.LC[a], f1.LC[a], f2.LC[a]);
  }
  // and the Q terms are purely quadratic: Q(2 dx) = 4 Q(dx).
  CHECK(f2.Qh == doctest::Approx(4.0 * f1.Qh).epsilon(1e-10));
  CHECK(f2.QD == doctest::Approx(4.0 * f1.QD).epsilon(1e-10));
  for (int a = 0; a < 4; ++a)
    CHECK(f2.QC[a] == doctest::Approx(4.0 * f1.QC[a]).epsilon(1e-9));
}

TEST_CASE("assembled Q forms annihilate common null directions") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(8, 13, eos);
  ExtendedState X = complete_state(st);
  std::uint64_t rng = 7;
  const std::int64_t i = 77;
  const ThermoEval T = eval_thermo(eos, st.h[i], st.s[i]);
  PointVals v;
  PointDerivs d;
  make_point_data(X, i, T, v, d);
  const Vec4<double> u{v.u[0], v.u[1], v.u[2], v.u[3]};
  const Mat4<double> gi = acoustical_inverse_metric(T.c * T.c, u);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec4<double> l = null_covector(gi, rng);
    PointDerivs dn = d;
    const double ah = 2 * detail::uniform01(rng) - 1;
    const double as = 2 * detail::uniform01(rng) - 1;
    double av[4];
    for (int k = 0; k < 4; ++k) av[k] = 2 * detail::uniform01(rng) - 1;
    for (int lam = 0; lam < 4; ++lam) {
      dn.dh[lam] = ah * l[lam];
      dn.ds[lam] = as * l[lam];
      for (int k = 0; k < 4; ++k) {
        dn.du[k][lam] = av[k] * l[lam];
        dn.dul[k][lam] = eta_diag(k) * dn.du[k][lam];
      }
    }
    const Forms f = eval_forms(v, dn);
    const double scale = 1.0 + std::abs(ah) + std::abs(as);
    CHECK(std::abs(f.Qh) < 1e-12 * scale);
    CHECK(std::abs(f.QD) < 1e-12 * scale);
    for (int a = 0; a < 4; ++a) CHECK(std::abs(f.Qu[a]) < 1e-12 * scale);
  }
}

TEST_CASE("formulation residuals vanish on a constant state") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto st = FluidState::constant(make_grid(8), eos, 0.05, -0.02);
  FormulationResiduals r = formulation_residuals(complete_state(st));
  for (const auto& row : r.report.rows) CHECK(row.linf < 1e-13);
}

TEST_CASE("formulation residuals decay under spectral refinement") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto recipe = InitialDataRecipe::random(1, 3, 0.03, 0.03, 0.03);
  std::vector<ResidualReport> reports;
  for (int n : {16, 32}) {
    FluidState st = realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
    reports.push_back(formulation_residuals(complete_state(st)).report);
  }
  for (const auto& eq : equation_names()) {
    const double coarse = reports[0].linf(eq);
    const double fine = reports[1].linf(eq);
    INFO(eq, ": ", coarse, " -> ", fine);
    if (eq == "curl-S") {
      CHECK(fine < 1e-12);  // identically zero by slot symmetry
    } else {
      CHECK(coarse / std::max(fine, 1e-300) > 50.0);
    }
  }
}

TEST_CASE("curl-S residual is at roundoff at any resolution") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  FluidState st = random_state(16, 17, eos);
  auto r = formulation_residuals(complete_state(st));
  CHECK(r.report.linf("curl-S") < 1e-12);
}

TEST_CASE("fault injection stalls the wave-h residual") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto recipe = InitialDataRecipe::random(1, 3, 0.03, 0.03, 0.03);
  for (Fault f : {Fault::Lh_FlipQh, Fault::Lh_FlipQs}) {
    std::vector<double> linf;
    for (int n : {12, 24}) {
      FluidState st = realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
      linf.push_back(formulation_residuals(complete_state(st), f).report.linf("wave-h"));
    }
    CHECK(linf[1] > 1e-7);                 // stalls at the size of the flipped term
    CHECK(linf[0] / linf[1] < 10.0);       // no spectral decay
  }
  for (Fault f : {Fault::Qu_FlipFirst, Fault::Qu_FlipGradH}) {
    std::vector<double> linf;
    for (int n : {12, 24}) {
      FluidState st = realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
      linf.push_back(formulation_residuals(complete_state(st), f).report.linf("wave-u"));
    }
    CHECK(linf[1] > 1e-7);
    CHECK(linf[0] / linf[1] < 10.0);
  }
}

TEST_CASE("identity suite: kinematic at roundoff, dynamic decays") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto recipe = InitialDataRecipe::random(19, 3, 0.03, 0.03, 0.03);
  std::vector<std::vector<IdentityCase>> runs;
  for (int n : {16, 32}) {
    FluidState st = realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
    runs.push_back(identity_suite(complete_state(st)));
  }
  for (size_t k = 0; k < runs[0].size(); ++k) {
    const auto& coarse = runs[0][k];
    const auto& fine = runs[1][k];
    INFO(coarse.name);
    if (coarse.cls == IdentityCase::Class::Kinematic) {
      CHECK(coarse.linf_rel < 1e-12);
      CHECK(fine.linf_rel < 1e-12);
    } else {
      CHECK(coarse.linf_abs / std::max(fine.linf_abs, 1e-300) > 50.0);
    }
  }
}

TEST_CASE("convergence study: fd4 order and spectral factors") {
  EosParams eos = EosParams::variable_c(0.8, 0.1);
  auto recipe = InitialDataRecipe::random(23, 2, 0.02, 0.02, 0.02);
  auto rows =
      convergence_study(recipe, eos, HyperbolicityRegion{}, {16, 32, 64}, DerivMode::Fd4);
  for (const auto& row : rows) {
    INFO(row.equation, " order ", row.fitted_order);
    if (row.equation == "curl-S") {
      CHECK(row.floor);
    } else if (row.equation == "wave-h") {
      CHECK(row.fitted_order > 3.5);
      CHECK(row.fitted_order < 4.5);
    } else {
      CHECK(row.fitted_order > 2.5);  // all residuals are at least this clean
    }
  }

  // constant state: everything at the floor.
  InitialDataRecipe flat;
  flat.h0 = 0.05;
  auto rows2 =
      convergence_study(flat, eos, HyperbolicityRegion{}, {16, 32}, DerivMode::Spectral);
  for (const auto& row : rows2) CHECK(row.floor);
}

TEST_CASE("box_g: constant and flat oracle values") {
  EosParams eos = EosParams::constant_c(1.0, Polynomial{{1.0}}, Polynomial{{0.0}});
  auto g = make_grid(16);
  auto st = FluidState::constant(g, eos, 0.0, 0.0);
  ExtendedState X = complete_state(st);

  // phi constant: both forms vanish.
  BoxGResult r0 = box_g_scalar(X, ScalarField(g, 2.0), ScalarField(g), ScalarField(g));
  CHECK(linf_norm(r0.divergence_form) < 1e-12);
  CHECK(linf_norm(r0.expansion_form) < 1e-12);

  // flat case, phi = sin(x1), dt phi = 0: box phi = laplacian = -sin(x1).
  auto phi = sample(g, [](double x, double, double) { return std::sin(x); });
  BoxGResult r1 = box_g_scalar(X, phi, ScalarField(g), ScalarField(g));
  auto expect = sample(g, [](double x, double, double) { return -std::sin(x); });
  double err = 0;
  for (std::int64_t i = 0; i < phi.size(); ++i)
    err = std::max(err, std::abs(r1.divergence_form[i] - expect[i]));
  CHECK(err < 1e-11);
}

TEST_CASE("box_g: divergence and expansion forms agree under refinement") {
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  auto recipe = InitialDataRecipe::random(29, 3, 0.03, 0.03, 0.03);
  double disc[2];
  int idx = 0;
  for (int n : {24, 48}) {
    FluidState st = realize(recipe, make_grid(n), eos, HyperbolicityRegion{});
    ExtendedState X = complete_state(st);
    BoxGResult r = box_g_scalar(X, X.base.h, X.Th, X.T2h);
    disc[idx++] = r.max_discrepancy;
  }
  CHECK(disc[0] / std::max(disc[1], 1e-300) > 1e3);
}

TEST_CASE("christoffel: flat and constant states vanish; compatibility decays") {
  EosParams eos = EosParams::constant_c(1.0, Polynomial{{1.0}}, Polynomial{{0.0}});
  auto st = FluidState::constant(make_grid(8), eos, 0.0, 0.0);
  auto gam = christoffel(complete_state(st));
  double mx = 0;
  for (const auto& G : gam)
    for (int a = 0; a < 4; ++a)
      for (int g_ = 0; g_ < 4; ++g_)
        for (int b = 0; b < 4; ++b) mx = std::max(mx, std::abs(G.gamma[a][g_][b]));
  CHECK(mx < 1e-13);

  // Lower-index symmetry and metric compatibility against numerically
  // differentiated metric component fields.
  EosParams eos2 = EosParams::variable_c(0.8, 0.2);
  double errs[2];
  int idx = 0;
  for (int n : {12, 24}) {
    FluidState rst = random_state(n, 37, eos2, 0.03);
    ExtendedState X = complete_state(rst);
    auto gm = christoffel(X);
    // g component fields
    std::array<std::array<ScalarField, 4>, 4> gfield;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) gfield[a][b] = ScalarField(rst.grid);
    for (std::int64_t i = 0; i < rst.h.size(); ++i) {
      const ThermoEval T = eval_thermo(eos2, rst.h[i], rst.s[i]);
      const Vec4<double> u{X.u0[i], rst.u[0][i], rst.u[1][i], rst.u[2][i]};
      const Mat4<double> gl = acoustical_metric(T.c * T.c, u);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) gfield[a][b][i] = gl[a][b];
    }
    double err = 0;
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = mu; nu < 4; ++nu) {
        auto dgnum = partial_derivative(gfield[mu][nu], 1);  // d_1 g_{mu nu}
        for (std::int64_t i = 0; i < rst.h.size(); i += 5) {
          const ThermoEval T = eval_thermo(eos2, rst.h[i], rst.s[i]);
          const Vec4<double> u{X.u0[i], rst.u[0][i], rst.u[1][i], rst.u[2][i]};
          const Mat4<double> gl = acoustical_metric(T.c * T.c, u);
          // d_a g_{mu nu} = g_{d mu} Gamma_a^d_nu + g_{d nu} Gamma_a^d_mu
          double rec = 0;
          for (int dd = 0; dd < 4; ++dd)
            rec += gl[dd][mu] * gm[size_t(i)].gamma[1][dd][nu] +
                   gl[dd][nu] * gm[size_t(i)].gamma[1][dd][mu];
          err = std::max(err, std::abs(dgnum[i] - rec));
          // symmetry in the outer index pair
          for (int g_ = 0; g_ < 4; ++g_)
            CHECK(std::abs(gm[size_t(i)].gamma[mu][g_][nu] -
                           gm[size_t(i)].gamma[nu][g_][mu]) < 1e-12);
        }
      }
    errs[idx++] = err;
  }
  CHECK(errs[0] / std::max(errs[1], 1e-300) > 1e2);
}
