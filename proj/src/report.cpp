#include "anl/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#ifndef ANL_GIT_DESCRIBE
#define ANL_GIT_DESCRIBE "unknown"
#endif

namespace anl {

std::string build_provenance() { return ANL_GIT_DESCRIBE; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  return out;
}
std::string meta_cols(const ReportMeta& m) {
  return m.eos_tag + "," + std::to_string(m.seed) + "," + m.mode + "," + m.provenance;
}
}  // namespace

void write_residual_csv(const std::string& path, const std::vector<ResidualReport>& reports,
                        const ReportMeta& meta) {
  auto out = open_out(path);
  out << "equation,n1,n2,n3,l2,linf,eos,seed,mode,provenance\n";
  for (const auto& rep : reports)
    for (const auto& row : rep.rows)
      out << row.equation << "," << rep.n1 << "," << rep.n2 << "," << rep.n3 << ","
          << format_double(row.l2) << "," << format_double(row.linf) << "," << meta_cols(meta)
          << "\n";
}

void write_identity_csv(const std::string& path,
                        const std::vector<std::pair<int, std::vector<IdentityCase>>>& by_size,
                        const ReportMeta& meta) {
  auto out = open_out(path);
  out << "identity,class,n,linf_abs,linf_rel,l2,eos,seed,mode,provenance\n";
  for (const auto& [n, cases] : by_size)
    for (const auto& c : cases)
      out << c.name << ","
          << (c.cls == IdentityCase::Class::Kinematic ? "kinematic" : "dynamic") << "," << n
          << "," << format_double(c.linf_abs) << "," << format_double(c.linf_rel) << ","
          << format_double(c.l2) << "," << meta_cols(meta) << "\n";
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           const ReportMeta& meta) {
  auto out = open_out(path);
  out << "equation,n,linf,fitted_order,decay_factor,floor,eos,seed,mode,provenance\n";
  for (const auto& row : rows)
    for (size_t k = 0; k < row.sizes.size(); ++k)
      out << row.equation << "," << row.sizes[k] << "," << format_double(row.linf[k]) << ","
          << format_double(row.fitted_order) << "," << format_double(row.decay_factor) << ","
          << (row.floor ? "yes" : "no") << "," << meta_cols(meta) << "\n";
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec,
                          const ReportMeta& meta, int n) {
  auto out = open_out(path);
  out << "time,cfl_speed_max,constraint_drift,n,eos,seed,mode,provenance\n";
  for (size_t k = 0; k < rec.times.size(); ++k)
    out << format_double(rec.times[k]) << "," << format_double(rec.cfl_speed_max[k]) << ","
        << format_double(rec.constraint_drift[k]) << "," << n << "," << meta_cols(meta)
        << "\n";
}

void write_regularity_csv(const std::string& path, const RegularityReport& rep,
                          const ReportMeta& meta, int n) {
  auto out = open_out(path);
  out << "time,h_HN,u_HN,s_HN1,S_HN,varpi_HN,n,eos,seed,mode,provenance\n";
  for (size_t k = 0; k < rep.times.size(); ++k) {
    out << format_double(rep.times[k]);
    for (const char* key : {"h_HN", "u_HN", "s_HN1", "S_HN", "varpi_HN"})
      out << "," << format_double(rep.norms.at(key)[k]);
    out << "," << n << "," << meta_cols(meta) << "\n";
  }
}

void write_json_summary(const std::string& path, const std::string& json_text) {
  auto out = open_out(path);
  out << json_text << "\n";
}

}  // namespace anl
