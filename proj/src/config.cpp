#include "anl/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace anl {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}
}  // namespace

TomlTable TomlTable::parse_string(const std::string& text) {
  TomlTable t;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config parse error at line " + std::to_string(lineno) +
                          ": unterminated table header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config parse error at line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config parse error at line " + std::to_string(lineno) +
                        ": empty key or value");
    if (!section.empty()) key = section + "." + key;
    t.kv_[key] = val;
  }
  return t;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ConfigError("config key '" + key + "' is not a number: " + it->second);
  }
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
  }
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<double> TomlTable::get_array(const std::string& key,
                                         const std::vector<double>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = trim(it->second);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError("config key '" + key + "' is not an array: " + v);
  std::vector<double> out;
  std::string body = v.substr(1, v.size() - 2);
  std::istringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw ConfigError("config key '" + key + "' has a non-numeric element: " + tok);
    }
  }
  return out;
}

RunConfig RunConfig::from_table(const TomlTable& t) {
  RunConfig c;
  c.command = t.get_string("run.command", "");
  c.out_dir = t.get_string("run.out", c.out_dir);
  c.seed = std::uint64_t(t.get_int("run.seed", std::int64_t(c.seed)));

  c.n = int(t.get_int("grid.n", c.n));
  const std::string mode = t.get_string("grid.mode", "spectral");
  if (mode == "spectral")
    c.mode = DerivMode::Spectral;
  else if (mode == "fd4")
    c.mode = DerivMode::Fd4;
  else
    throw ConfigError("config key 'grid.mode' must be spectral or fd4");
  c.dealias = t.get_bool("grid.dealias", c.dealias);
  {
    std::vector<double> dsizes;
    for (int s : c.sizes) dsizes.push_back(s);
    auto arr = t.get_array("grid.sizes", dsizes);
    c.sizes.clear();
    for (double v : arr) c.sizes.push_back(int(v));
  }

  const std::string fam = t.get_string("eos.family", "variable-c");
  const double c0 = t.get_double("eos.c0", 0.8);
  const double eps = t.get_double("eos.eps", 0.2);
  Polynomial A{t.get_array("eos.A", {1.0, 0.1})};
  Polynomial B{t.get_array("eos.B", {0.0, 0.05, 0.02})};
  if (fam == "constant-c")
    c.eos = EosParams::constant_c(c0, A, B);
  else if (fam == "variable-c")
    c.eos = EosParams::variable_c(c0, eps, A, B);
  else
    throw ConfigError("config key 'eos.family' must be constant-c or variable-c");
  c.eos.bar_H = t.get_double("eos.barH", 1.0);

  c.region.h_min = t.get_double("region.h_min", c.region.h_min);
  c.region.h_max = t.get_double("region.h_max", c.region.h_max);
  c.region.s_min = t.get_double("region.s_min", c.region.s_min);
  c.region.s_max = t.get_double("region.s_max", c.region.s_max);
  c.region.u_max = t.get_double("region.u_max", c.region.u_max);

  c.h0 = t.get_double("data.h0", c.h0);
  c.s0 = t.get_double("data.s0", c.s0);
  c.kmax = int(t.get_int("data.kmax", c.kmax));
  c.modes_per_field = int(t.get_int("data.modes_per_field", c.modes_per_field));
  c.amp_h = t.get_double("data.amp_h", c.amp_h);
  c.amp_s = t.get_double("data.amp_s", c.amp_s);
  c.amp_u = t.get_double("data.amp_u", c.amp_u);

  c.final_time = t.get_double("evolve.final_time", c.final_time);
  c.cfl = t.get_double("evolve.cfl", c.cfl);
  c.fixed_dt = t.get_double("evolve.fixed_dt", c.fixed_dt);
  c.evolve_u0_diagnostic = t.get_bool("evolve.diagnostic_u0", c.evolve_u0_diagnostic);
  c.snapshot_every = int(t.get_int("evolve.snapshot_every", c.snapshot_every));

  c.tol_resid_decay = t.get_double("tolerances.resid_decay", c.tol_resid_decay);
  c.tol_resid_abs = t.get_double("tolerances.resid_abs", c.tol_resid_abs);
  c.tol_floor = t.get_double("tolerances.floor", c.tol_floor);
  c.tol_kinematic = t.get_double("tolerances.kinematic", c.tol_kinematic);
  c.tol_constraint = t.get_double("tolerances.constraint", c.tol_constraint);
  c.tol_energy_defect = t.get_double("tolerances.energy_defect", c.tol_energy_defect);
  c.coercivity_cap = t.get_double("tolerances.coercivity_cap", c.coercivity_cap);

  c.fault = t.get_string("fault.key", "");
  return c;
}

}  // namespace anl
