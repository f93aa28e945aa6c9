#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "anl/geometry.hpp"
#include "anl/initdata.hpp"

using namespace anl;

namespace {
Vec4<double> boosted_u(std::uint64_t& st, double umax = 0.45) {
  Vec4<double> u;
  for (int a = 1; a < 4; ++a) u[a] = umax * (2.0 * detail::uniform01(st) - 1.0);
  u[0] = std::sqrt(1.0 + u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
  return u;
}
ThermoEval thermo_with_c(double c) {
  return eval_thermo(EosParams::constant_c(c), 0.0, 0.0);
}
double det4(const Mat4<double>& m) {
  Eigen::Matrix4d e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e(i, j) = m[i][j];
  return e.determinant();
}
}  // namespace

TEST_CASE("metric pair: c = 1 at rest gives Minkowski") {
  auto [g, gi] = acoustical_metric_pair(thermo_with_c(1.0), {1, 0, 0, 0});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(g(i, j) == doctest::Approx(i == j ? eta_diag(i) : 0.0).epsilon(1e-14));
      CHECK(gi(i, j) == doctest::Approx(i == j ? eta_diag(i) : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("metric pair: c = 1/2 at rest gives diag(-1,4,4,4)") {
  auto [g, gi] = acoustical_metric_pair(thermo_with_c(0.5), {1, 0, 0, 0});
  CHECK(g(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  for (int a = 1; a < 4; ++a) CHECK(g(a, a) == doctest::Approx(4.0).epsilon(1e-14));
  (void)gi;
}

TEST_CASE("metric times inverse is the identity for boosted states") {
  std::uint64_t st = 5;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec4<double> u = boosted_u(st);
    auto [g, gi] = acoustical_metric_pair(thermo_with_c(0.8), u);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double acc = 0;
        for (int k = 0; k < 4; ++k) acc += g(i, k) * gi(k, j);
        CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
  }
}

TEST_CASE("g(u,u) = -1 whenever u.u = -1") {
  std::uint64_t st = 9;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec4<double> u = boosted_u(st);
    auto [g, gi] = acoustical_metric_pair(thermo_with_c(0.7), u);
    double acc = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) acc += g(i, j) * u[i] * u[j];
    CHECK(acc == doctest::Approx(-1.0).epsilon(1e-12));
    (void)gi;
  }
}

TEST_CASE("det g = -c^-6, numerically cross-checked") {
  CHECK(det_g(thermo_with_c(1.0)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(det_g(thermo_with_c(0.5)) == doctest::Approx(-64.0).epsilon(1e-13));
  std::uint64_t st = 13;
  for (int trial = 0; trial < 20; ++trial) {
    const double c = 0.4 + 0.6 * detail::uniform01(st);
    const Vec4<double> u = boosted_u(st);
    const Mat4<double> g = acoustical_metric(c * c, u);
    CHECK(det4(g) == doctest::Approx(-std::pow(c, -6.0)).epsilon(1e-10));
  }
}

TEST_CASE("projector properties") {
  auto p = projector({1, 0, 0, 0});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(p[i][j] == doctest::Approx(i == j && i > 0 ? 1.0 : 0.0).epsilon(1e-14));

  std::uint64_t st = 17;
  for (int trial = 0; trial < 30; ++trial) {
    const Vec4<double> u = boosted_u(st);
    auto P = projector(u);
    const Vec4<double> ul = lower(u);
    for (int a = 0; a < 4; ++a) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) acc += P[a][k] * ul[k];
      CHECK(std::abs(acc) < 1e-12);
    }
    // Pi o Pi = Pi with one index lowered by eta.
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double acc = 0;
        for (int k = 0; k < 4; ++k) acc += P[a][k] * eta_diag(k) * P[k][b];
        CHECK(std::abs(acc - P[a][b]) < 1e-12);
      }
  }
}

TEST_CASE("spatial inverse metric G^-1") {
  auto m = spatial_metric_G({1, 0, 0, 0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(m(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));

  auto m2 = spatial_metric_G({std::sqrt(2.0), 1, 0, 0});
  CHECK(m2(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m2(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m2(2, 2) == doctest::Approx(1.0).epsilon(1e-14));

  std::uint64_t st = 23;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec4<double> u = boosted_u(st, 0.8);
    auto [lo, hi] = eigenvalue_bounds(spatial_metric_G(u));
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0 + 1e-12);
  }
}

TEST_CASE("epsilon contraction identity") {
  // eps^{a b k l} eps_{a b m n} = 2 d^l_m d^k_n - 2 d^k_m d^l_n
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          double acc = 0;
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              acc += double(eps4_upper(a, b, k, l)) * double(eps4_lower(a, b, m, n));
          const double expect = 2.0 * ((l == m ? 1 : 0) * (k == n ? 1 : 0) -
                                       (k == m ? 1 : 0) * (l == n ? 1 : 0));
          CHECK(acc == doctest::Approx(expect).epsilon(1e-15));
        }
}

TEST_CASE("raising then lowering with eta is the identity") {
  std::uint64_t st = 29;
  for (int trial = 0; trial < 10; ++trial) {
    Vec4<double> v;
    for (int a = 0; a < 4; ++a) v[a] = 2.0 * detail::uniform01(st) - 1.0;
    const Vec4<double> vl = lower(v);
    Vec4<double> up;
    for (int a = 0; a < 4; ++a) up[a] = eta_diag(a) * vl[a];
    for (int a = 0; a < 4; ++a) CHECK(up[a] == v[a]);
  }
}

TEST_CASE("characteristic speeds") {
  CHECK(cfl_speed(thermo_with_c(0.5), {1, 0, 0, 0}).max == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cfl_speed(thermo_with_c(1.0), {1, 0, 0, 0}).max == doctest::Approx(1.0).epsilon(1e-12));

  std::uint64_t st = 31;
  for (int trial = 0; trial < 50; ++trial) {
    const double c = 0.3 + 0.7 * detail::uniform01(st);
    const Vec4<double> u = boosted_u(st, 0.9);
    const auto sp = cfl_speed(eval_thermo(EosParams::constant_c(c), 0.0, 0.0), u);
    CHECK(sp.sound_cone <= 1.0 + 1e-10);  // causality
    CHECK(sp.transport <= sp.sound_cone + 1e-12);
    // Root-scan oracle: a fan of directions never exceeds the reported max.
    const Mat4<double> gi = acoustical_inverse_metric(c * c, u);
    for (int dir = 0; dir < 40; ++dir) {
      const double z = 2.0 * detail::uniform01(st) - 1.0;
      const double ph = 6.283185307179586 * detail::uniform01(st);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double speed =
          cone_speed_in_direction(gi, {r * std::cos(ph), r * std::sin(ph), z});
      CHECK(speed <= sp.sound_cone + 1e-9);
    }
    // Velocity-addition value along the boost direction.
    const double beta = std::sqrt(u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0];
    CHECK(sp.sound_cone == doctest::Approx((beta + c) / (1 + beta * c)).epsilon(1e-9));
  }
}
