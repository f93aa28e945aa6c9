#include "anl/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace anl {

std::pair<Metric4, Metric4> acoustical_metric_pair(const ThermoEval& thermo,
                                                   const Vec4<double>& u) {
  if (!(thermo.c > 0.0 && thermo.c <= 1.0 + 1e-12))
    throw std::domain_error("acoustical_metric_pair: c outside (0,1]");
  if (std::abs(dot_eta(u, u) + 1.0) > 1e-10)
    throw std::invalid_argument("acoustical_metric_pair: u.u != -1");
  const double c2 = thermo.c * thermo.c;
  Metric4 g, gi;
  g.a = acoustical_metric(c2, u);
  gi.a = acoustical_inverse_metric(c2, u);
  return {g, gi};
}

double det_g(const ThermoEval& thermo) {
  if (!(thermo.c > 0.0 && thermo.c <= 1.0 + 1e-12))
    throw std::domain_error("det_g: c outside (0,1]");
  const double c = thermo.c;
  const double closed = -1.0 / (c * c * c * c * c * c);
  // Cross-check against the numeric determinant at rest; boost invariance of
  // the formula is exercised by the test suite with random u.
  const Vec4<double> rest{1.0, 0.0, 0.0, 0.0};
  const Mat4<double> g = acoustical_metric(c * c, rest);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = g[i][j];
  const double numeric = m.determinant();
  if (std::abs(numeric - closed) > 1e-10 * std::abs(closed))
    throw std::runtime_error("det_g: closed formula disagrees with numeric determinant");
  return closed;
}

Mat4<double> projector(const Vec4<double>& u) {
  if (std::abs(dot_eta(u, u) + 1.0) > 1e-10)
    throw std::invalid_argument("projector: u.u != -1");
  Mat4<double> p{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      p[i][j] = u[i] * u[j];
      if (i == j) p[i][j] += eta_diag(i);
    }
  return p;
}

SpatialInvMetric spatial_metric_G(const Vec4<double>& u) {
  if (!(u[0] > 0.0)) throw std::invalid_argument("spatial_metric_G: u^0 must be positive");
  SpatialInvMetric m;
  const double iu02 = 1.0 / (u[0] * u[0]);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      m.a[i][j] = -u[i + 1] * u[j + 1] * iu02;
      if (i == j) m.a[i][j] += 1.0;
    }
  return m;
}

std::pair<double, double> eigenvalue_bounds(const SpatialInvMetric& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m.a[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(e);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

double cone_speed_in_direction(const Mat4<double>& gi, const std::array<double, 3>& xi) {
  // (g^-1)^{00} l^2 + 2 (g^-1)^{0i} xi_i l + (g^-1)^{ij} xi_i xi_j = 0
  const double a = gi[0][0];
  double b = 0.0, c = 0.0;
  for (int i = 0; i < 3; ++i) {
    b += gi[0][i + 1] * xi[i];
    for (int j = 0; j < 3; ++j) c += gi[i + 1][j + 1] * xi[i] * xi[j];
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) throw std::runtime_error("cone_speed_in_direction: complex roots");
  const double sq = std::sqrt(disc);
  const double r1 = (-b + sq) / a;
  const double r2 = (-b - sq) / a;
  return std::max(std::abs(r1), std::abs(r2));
}

CflSpeeds cfl_speed(const ThermoEval& thermo, const Vec4<double>& u) {
  if (!(thermo.c > 0.0 && thermo.c <= 1.0 + 1e-12))
    throw std::domain_error("cfl_speed: c outside (0,1]");
  const double c2 = thermo.c * thermo.c;
  const Mat4<double> gi = acoustical_inverse_metric(c2, u);

  CflSpeeds out{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i)
    out.transport = std::max(out.transport, std::abs(u[i + 1] / u[0]));

  // The cone is a boosted isotropic cone, so the extremal coordinate speed is
  // attained along the fluid 3-velocity (relativistic addition of c and
  // |beta|); scan the axes plus the boost direction and a small direction
  // fan around it to stay formula-independent.
  std::vector<std::array<double, 3>> dirs = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  const double bnorm =
      std::sqrt(u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0];
  if (bnorm > 1e-14) dirs.push_back({u[1] / u[0] / bnorm, u[2] / u[0] / bnorm, u[3] / u[0] / bnorm});
  for (auto d : dirs) {
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    for (auto& x : d) x /= n;
    out.sound_cone = std::max(out.sound_cone, cone_speed_in_direction(gi, d));
  }
  // Velocity-addition value along the boost; keep whichever is larger.
  const double add = (bnorm + thermo.c) / (1.0 + bnorm * thermo.c);
  out.sound_cone = std::max(out.sound_cone, add);
  out.max = std::max(out.sound_cone, out.transport);
  return out;
}

}  // namespace anl
