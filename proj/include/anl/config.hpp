#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anl/eos.hpp"
#include "anl/fluid.hpp"
#include "anl/initdata.hpp"

// Run configuration: TOML file -> RunConfig, with CLI overrides applied by
// the front-end. The parser covers the subset used by run files: [tables],
// key = value with strings, numbers, booleans and flat arrays, and #
// comments.

namespace anl {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// Flat "table.key" -> raw value text.
class TomlTable {
 public:
  static TomlTable parse_file(const std::string& path);
  static TomlTable parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_array(const std::string& key,
                                const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::string> kv_;
};

struct RunConfig {
  std::string command;  // verify | identities | evolve | energy | convergence
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  // grid
  int n = 24;
  DerivMode mode = DerivMode::Spectral;
  bool dealias = false;
  std::vector<int> sizes = {24, 48};  // refinement studies

  // eos
  EosParams eos = EosParams::variable_c(0.8, 0.2);
  HyperbolicityRegion region;

  // initial data
  double h0 = 0.0, s0 = 0.0;
  int kmax = 3, modes_per_field = 6;
  double amp_h = 0.02, amp_s = 0.02, amp_u = 0.02;

  // evolution
  double final_time = 0.5;
  double cfl = 0.5;
  double fixed_dt = 0.0;
  bool evolve_u0_diagnostic = false;
  int snapshot_every = 0;

  // tolerance gates (defaults from the acceptance criteria)
  double tol_resid_decay = 1e3;
  double tol_resid_abs = 1e-7;
  double tol_floor = 1e-12;
  double tol_kinematic = 1e-12;
  double tol_constraint = 1e-10;
  double tol_energy_defect = 1e-4;
  double coercivity_cap = 1e6;

  std::string fault;  // empty, or one of the fault-injection keys

  InitialDataRecipe recipe() const {
    InitialDataRecipe r =
        InitialDataRecipe::random(seed, kmax, amp_h, amp_s, amp_u, modes_per_field);
    r.h0 = h0;
    r.s0 = s0;
    return r;
  }

  static RunConfig from_table(const TomlTable& t);
};

}  // namespace anl
