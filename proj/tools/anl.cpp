// Batch front-end: configuration parsing, run orchestration and report
// emission. One command per process; exit status 0 iff all gates pass.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "anl/config.hpp"
#include "anl/energy.hpp"
#include "anl/report.hpp"
#include "anl/solver.hpp"
#include "anl/structure.hpp"

namespace {

using namespace anl;
namespace fs = std::filesystem;
using nlohmann::json;

Fault parse_fault(const std::string& key) {
  if (key.empty()) return Fault::None;
  if (key == "Lh.q_h") return Fault::Lh_FlipQh;
  if (key == "Lh.q_s") return Fault::Lh_FlipQs;
  if (key == "Qu.first") return Fault::Qu_FlipFirst;
  if (key == "Qu.gradh") return Fault::Qu_FlipGradH;
  throw ConfigError("unknown fault key: " + key +
                    " (expected Lh.q_h, Lh.q_s, Qu.first or Qu.gradh)");
}

ReportMeta meta_for(const RunConfig& c) {
  ReportMeta m;
  m.eos_tag = c.eos.tag;
  m.seed = c.seed;
  m.mode = c.mode == DerivMode::Spectral ? "spectral" : "fd4";
  m.provenance = build_provenance();
  return m;
}

bool residual_gate(const std::vector<ResidualReport>& reports, const RunConfig& c,
                   json& summary) {
  bool pass = true;
  json eqs = json::array();
  for (const auto& eq : equation_names()) {
    const double first = reports.front().linf(eq);
    const double last = reports.back().linf(eq);
    const bool at_floor = first <= c.tol_floor && last <= c.tol_floor;
    const double decay = first / std::max(last, 1e-300);
    const bool ok =
        (at_floor || decay >= c.tol_resid_decay) && last <= c.tol_resid_abs;
    pass = pass && ok;
    eqs.push_back({{"equation", eq},
                   {"linf_coarse", first},
                   {"linf_fine", last},
                   {"decay", decay},
                   {"floor", at_floor},
                   {"pass", ok}});
  }
  summary["equations"] = eqs;
  return pass;
}

int cmd_verify(const RunConfig& c) {
  const Fault fault = parse_fault(c.fault);
  std::vector<ResidualReport> reports;
  for (int n : c.sizes) {
    auto grid = std::make_shared<TorusGrid>(n, n, n, c.mode);
    FluidState st = realize(c.recipe(), grid, c.eos, c.region);
    reports.push_back(formulation_residuals(complete_state(st), fault).report);
  }
  write_residual_csv(c.out_dir + "/residuals.csv", reports, meta_for(c));
  json summary;
  summary["command"] = "verify";
  summary["fault"] = c.fault;
  const bool pass = residual_gate(reports, c, summary);
  summary["pass"] = pass;
  write_json_summary(c.out_dir + "/verify.json", summary.dump(2));
  std::cout << (pass ? "verify: PASS" : "verify: FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_identities(const RunConfig& c) {
  std::vector<std::pair<int, std::vector<IdentityCase>>> by_size;
  for (int n : c.sizes) {
    auto grid = std::make_shared<TorusGrid>(n, n, n, c.mode);
    FluidState st = realize(c.recipe(), grid, c.eos, c.region);
    by_size.emplace_back(n, identity_suite(complete_state(st)));
  }
  write_identity_csv(c.out_dir + "/identities.csv", by_size, meta_for(c));
  bool pass = true;
  json cases = json::array();
  for (size_t k = 0; k < by_size.back().second.size(); ++k) {
    const auto& fine = by_size.back().second[k];
    json row{{"identity", fine.name},
             {"class", fine.cls == IdentityCase::Class::Kinematic ? "kinematic" : "dynamic"},
             {"linf_rel_fine", fine.linf_rel},
             {"linf_abs_fine", fine.linf_abs}};
    bool ok = true;
    if (fine.cls == IdentityCase::Class::Kinematic) {
      ok = fine.linf_rel <= c.tol_kinematic;
    } else if (by_size.size() >= 2) {
      const auto& coarse = by_size.front().second[k];
      const bool floor = coarse.linf_abs <= c.tol_floor && fine.linf_abs <= c.tol_floor;
      const double decay = coarse.linf_abs / std::max(fine.linf_abs, 1e-300);
      ok = (floor || decay >= c.tol_resid_decay) && fine.linf_abs <= c.tol_resid_abs;
      row["decay"] = decay;
    }
    row["pass"] = ok;
    pass = pass && ok;
    cases.push_back(row);
  }
  json summary{{"command", "identities"}, {"cases", cases}, {"pass", pass}};
  write_json_summary(c.out_dir + "/identities.json", summary.dump(2));
  std::cout << (pass ? "identities: PASS" : "identities: FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_evolve(const RunConfig& c) {
  EvolutionConfig ec;
  ec.grid = std::make_shared<TorusGrid>(c.n, c.n, c.n, c.mode);
  ec.eos = c.eos;
  ec.region = c.region;
  ec.recipe = c.recipe();
  ec.final_time = c.final_time;
  ec.cfl = c.cfl;
  ec.fixed_dt = c.fixed_dt;
  ec.evolve_u0_diagnostic = c.evolve_u0_diagnostic;
  ec.snapshot_every = c.snapshot_every;
  Trajectory traj = evolve(ec);
  write_trajectory_csv(c.out_dir + "/trajectory.csv", traj.record, meta_for(c), c.n);
  auto dump = [&](const FluidState& st, const std::string& name) {
    save_fields(c.out_dir + "/" + name, *st.grid,
                {{"h", &st.h}, {"s", &st.s}, {"u1", &st.u[0]}, {"u2", &st.u[1]},
                 {"u3", &st.u[2]}},
                st.time);
  };
  if (c.snapshot_every > 0)
    for (size_t k = 0; k < traj.snapshots.size(); ++k)
      dump(traj.snapshots[k], "snapshot_" + std::to_string(k) + ".bin");
  dump(traj.snapshots.back(), "final_state.bin");
  bool pass = true;
  if (c.evolve_u0_diagnostic) pass = traj.record.max_constraint_drift <= c.tol_constraint;
  json summary{{"command", "evolve"},
               {"steps", traj.record.times.size() - 1},
               {"final_time", traj.record.times.back()},
               {"max_constraint_drift", traj.record.max_constraint_drift},
               {"pass", pass}};
  write_json_summary(c.out_dir + "/evolve.json", summary.dump(2));
  std::cout << (pass ? "evolve: PASS" : "evolve: FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_energy(const RunConfig& c) {
  EvolutionConfig ec;
  ec.grid = std::make_shared<TorusGrid>(c.n, c.n, c.n, c.mode);
  ec.eos = c.eos;
  ec.region = c.region;
  ec.recipe = c.recipe();
  ec.final_time = c.final_time;
  ec.cfl = c.cfl;
  ec.fixed_dt = c.fixed_dt;
  ec.snapshot_every = c.snapshot_every > 0 ? c.snapshot_every : 2;
  if (ec.fixed_dt <= 0.0) {
    // The energy identities integrate over uniformly spaced snapshots, so
    // pick a fixed step safely below the initial CFL bound.
    FluidState st0 = realize(ec.recipe, ec.grid, ec.eos, ec.region);
    const double dx = ec.grid->spacing(1);
    const double dt0 = 0.8 * ec.cfl * dx / std::max(max_characteristic_speed(st0), 1e-14);
    const int steps = std::max(4, int(std::ceil(ec.final_time / dt0)));
    ec.fixed_dt = ec.final_time / steps;
  }
  Trajectory traj = evolve(ec);

  const auto wave_h = wave_energy_identity_defect(traj.snapshots, TrackedScalar::H);
  const auto wave_u1 = wave_energy_identity_defect(traj.snapshots, TrackedScalar::U1);
  const auto tr_S1 = transport_energy_identity_defect(traj.snapshots, TransportQuantity::S, 1);
  const auto tr_w1 =
      transport_energy_identity_defect(traj.snapshots, TransportQuantity::Varpi, 1);

  ExtendedState Xf = complete_state(traj.snapshots.back());
  const EllipticEnergyReport co = coercivity_check(Xf, 3, c.seed);
  const RegularityReport reg = regularity_report(traj.snapshots, 3);
  write_regularity_csv(c.out_dir + "/regularity.csv", reg, meta_for(c), c.n);

  const bool pass = wave_h.defect_rel <= c.tol_energy_defect &&
                    wave_u1.defect_rel <= c.tol_energy_defect &&
                    tr_S1.defect_rel <= c.tol_energy_defect && co.alpha_star >= 1e-4 &&
                    co.C_upper <= c.coercivity_cap && co.C_lower <= c.coercivity_cap;
  json summary{{"command", "energy"},
               {"wave_defect_h", wave_h.defect_rel},
               {"wave_defect_u1", wave_u1.defect_rel},
               {"transport_defect_S1", tr_S1.defect_rel},
               {"transport_defect_varpi1", tr_w1.defect_rel},
               {"alpha_star", co.alpha_star},
               {"C_upper", co.C_upper},
               {"C_lower", co.C_lower},
               {"lambda", co.lambda},
               {"Lambda", co.Lambda},
               {"max_envelope_rate", reg.max_envelope_rate},
               {"super_exponential", reg.super_exponential_flag},
               {"pass", pass}};
  write_json_summary(c.out_dir + "/energy.json", summary.dump(2));
  std::cout << (pass ? "energy: PASS" : "energy: FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_convergence(const RunConfig& c) {
  const Fault fault = parse_fault(c.fault);
  auto rows = convergence_study(c.recipe(), c.eos, c.region, c.sizes, c.mode, fault);
  write_convergence_csv(c.out_dir + "/convergence.csv", rows, meta_for(c));
  json summary{{"command", "convergence"}};
  json tbl = json::array();
  for (const auto& row : rows)
    tbl.push_back({{"equation", row.equation},
                   {"fitted_order", row.fitted_order},
                   {"decay_factor", row.decay_factor},
                   {"floor", row.floor}});
  summary["table"] = tbl;
  summary["pass"] = true;
  write_json_summary(c.out_dir + "/convergence.json", summary.dump(2));
  std::cout << "convergence: PASS\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relativistic Euler formulation laboratory"};
  std::string command, config_path, out_dir, grid_spec, mode_str, fault_key;
  std::uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("command", command,
                 "verify | identities | evolve | energy | convergence");
  app.add_option("--config", config_path, "TOML run configuration");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (u64)");
  app.add_option("--grid", grid_spec, "grid as NxNxN (cubic)");
  app.add_option("--mode", mode_str, "spectral | fd4");
  app.add_option("--fault", fault_key, "fault-injection key");
  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;

#ifdef _OPENMP
  if (const char* threads = std::getenv("ANL_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }
#endif

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_table(TomlTable::parse_file(config_path));
    if (!command.empty()) cfg.command = command;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (have_seed) cfg.seed = seed;
    if (!fault_key.empty()) cfg.fault = fault_key;
    if (!mode_str.empty()) {
      if (mode_str == "spectral")
        cfg.mode = DerivMode::Spectral;
      else if (mode_str == "fd4")
        cfg.mode = DerivMode::Fd4;
      else
        throw ConfigError("--mode must be spectral or fd4");
    }
    if (!grid_spec.empty()) {
      int a = 0, b = 0, d = 0;
      if (std::sscanf(grid_spec.c_str(), "%dx%dx%d", &a, &b, &d) != 3 || a != b || b != d)
        throw ConfigError("--grid must be NxNxN (cubic)");
      cfg.n = a;
    }
    if (cfg.command.empty())
      throw ConfigError("no command given (positional argument or run.command)");
    fs::create_directories(cfg.out_dir);

    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "identities") return cmd_identities(cfg);
    if (cfg.command == "evolve") return cmd_evolve(cfg);
    if (cfg.command == "energy") return cmd_energy(cfg);
    if (cfg.command == "convergence") return cmd_convergence(cfg);
    throw ConfigError("unknown command: " + cfg.command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
