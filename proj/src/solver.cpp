#include "anl/solver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anl {

namespace {

struct Fields5 {
  ScalarField h, s;
  std::array<ScalarField, 3> u;
  ScalarField u0d;  // diagnostic, may be empty
};

Fields5 from_state(const FluidState& st, bool diag) {
  Fields5 f{st.h, st.s, st.u, ScalarField()};
  if (diag) {
    f.u0d = ScalarField(st.grid);
    for (std::int64_t i = 0; i < st.h.size(); ++i)
      f.u0d[i] = std::sqrt(1.0 + st.u[0][i] * st.u[0][i] + st.u[1][i] * st.u[1][i] +
                           st.u[2][i] * st.u[2][i]);
  }
  return f;
}

struct Rhs6 {
  ClosureRhs c;
  ScalarField Tu0;  // diagnostic, may be empty
};

Rhs6 eval_rhs(const FluidState& proto, const Fields5& f, bool diag) {
  FluidState st = proto;
  st.h = f.h;
  st.s = f.s;
  st.u = f.u;
  Rhs6 out{closure_rhs(st), ScalarField()};
  if (diag) {
    // Passive integration target: the solved dt u^0 = u_b dt u^b / u^0 with
    // the algebraic u^0.
    out.Tu0 = ScalarField(st.grid);
    for (std::int64_t i = 0; i < st.h.size(); ++i) {
      const double u0 = std::sqrt(1.0 + st.u[0][i] * st.u[0][i] + st.u[1][i] * st.u[1][i] +
                                  st.u[2][i] * st.u[2][i]);
      out.Tu0[i] = (st.u[0][i] * out.c.Tu[0][i] + st.u[1][i] * out.c.Tu[1][i] +
                    st.u[2][i] * out.c.Tu[2][i]) /
                   u0;
    }
  }
  return out;
}

void axpy(Fields5& y, double a, const Rhs6& k, bool diag) {
  const std::int64_t n = y.h.size();
  for (std::int64_t i = 0; i < n; ++i) {
    y.h[i] += a * k.c.Th[i];
    y.s[i] += a * k.c.Ts[i];
    for (int b = 0; b < 3; ++b) y.u[b][i] += a * k.c.Tu[b][i];
    if (diag) y.u0d[i] += a * k.Tu0[i];
  }
}

Fields5 shifted(const Fields5& y, double a, const Rhs6& k, bool diag) {
  Fields5 out = y;
  axpy(out, a, k, diag);
  return out;
}

}  // namespace

ClosureRhs rhs(const FluidState& raw) { return closure_rhs(raw); }

double max_characteristic_speed(const FluidState& raw) {
  double vmax = 0.0;
  const std::int64_t n = raw.h.size();
  for (std::int64_t i = 0; i < n; ++i) {
    const ThermoEval T = eval_thermo(raw.eos, raw.h[i], raw.s[i]);
    const double u0 = std::sqrt(1.0 + raw.u[0][i] * raw.u[0][i] + raw.u[1][i] * raw.u[1][i] +
                                raw.u[2][i] * raw.u[2][i]);
    const Vec4<double> u{u0, raw.u[0][i], raw.u[1][i], raw.u[2][i]};
    vmax = std::max(vmax, cfl_speed(T, u).max);
  }
  return vmax;
}

Trajectory evolve(const EvolutionConfig& config) {
  if (!(config.cfl > 0.0 && config.cfl < 1.0))
    throw std::invalid_argument("evolve: CFL factor must lie in (0,1)");
  FluidState proto = FluidState::constant(config.grid, config.eos, 0.0, 0.0);
  proto.region = config.region;

  FluidState st = realize(config.recipe, config.grid, config.eos, config.region);
  const bool diag = config.evolve_u0_diagnostic;
  Fields5 y = from_state(st, diag);

  const double dx = std::min({config.grid->spacing(1), config.grid->spacing(2),
                              config.grid->spacing(3)});
  Trajectory traj;
  traj.record.times.push_back(0.0);
  traj.record.cfl_speed_max.push_back(max_characteristic_speed(st));
  traj.record.constraint_drift.push_back(0.0);

  auto push_snapshot = [&](double time) {
    FluidState snap = proto;
    snap.h = y.h;
    snap.s = y.s;
    snap.u = y.u;
    snap.time = time;
    traj.snapshots.push_back(std::move(snap));
  };
  push_snapshot(0.0);

  double t = 0.0;
  int step = 0;
  while (t < config.final_time - 1e-14) {
    FluidState cur = proto;
    cur.h = y.h;
    cur.s = y.s;
    cur.u = y.u;
    const double speed = max_characteristic_speed(cur);
    double dt = config.cfl * dx / std::max(speed, 1e-14);
    if (config.fixed_dt > 0.0) {
      if (config.fixed_dt > dt * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "evolve: CFL violation, fixed dt " << config.fixed_dt
            << " exceeds the stable step " << dt << " at t = " << t;
        throw std::runtime_error(msg.str());
      }
      dt = config.fixed_dt;
    }
    dt = std::min(dt, config.final_time - t);

    try {
      const Rhs6 k1 = eval_rhs(proto, y, diag);
      const Rhs6 k2 = eval_rhs(proto, shifted(y, 0.5 * dt, k1, diag), diag);
      const Rhs6 k3 = eval_rhs(proto, shifted(y, 0.5 * dt, k2, diag), diag);
      const Rhs6 k4 = eval_rhs(proto, shifted(y, dt, k3, diag), diag);
      axpy(y, dt / 6.0, k1, diag);
      axpy(y, dt / 3.0, k2, diag);
      axpy(y, dt / 3.0, k3, diag);
      axpy(y, dt / 6.0, k4, diag);
    } catch (const RegionExitError& e) {
      std::ostringstream msg;
      msg << e.what() << " during the step from t = " << t;
      throw RegionExitError(msg.str(), e.offending_points);
    }
    t += dt;
    ++step;

    double drift = 0.0;
    if (diag) {
      for (std::int64_t i = 0; i < y.h.size(); ++i) {
        const double uu = -y.u0d[i] * y.u0d[i] + y.u[0][i] * y.u[0][i] +
                          y.u[1][i] * y.u[1][i] + y.u[2][i] * y.u[2][i];
        drift = std::max(drift, std::abs(uu + 1.0));
      }
    }
    traj.record.times.push_back(t);
    traj.record.cfl_speed_max.push_back(speed);
    traj.record.constraint_drift.push_back(drift);
    traj.record.max_constraint_drift = std::max(traj.record.max_constraint_drift, drift);

    if (config.snapshot_every > 0 && step % config.snapshot_every == 0 &&
        t < config.final_time - 1e-14)
      push_snapshot(t);
  }
  push_snapshot(t);
  if (traj.snapshots.size() >= 2)
    traj.snapshot_dt = traj.snapshots[1].time - traj.snapshots[0].time;
  return traj;
}

FluidState evolve_final(const EvolutionConfig& config) {
  return std::move(evolve(config).snapshots.back());
}

}  // namespace anl
