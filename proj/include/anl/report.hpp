#pragma once

#include <string>
#include <vector>

#include "anl/energy.hpp"
#include "anl/solver.hpp"
#include "anl/structure.hpp"

// CSV and JSON report emission. Every row carries grid, EOS, seed and build
// provenance columns; doubles are printed with %.17g so identical runs give
// byte-identical files.

namespace anl {

struct ReportMeta {
  std::string eos_tag;
  std::uint64_t seed = 0;
  std::string mode;
  std::string provenance;  // git describe of the build
};

std::string build_provenance();
std::string format_double(double v);

void write_residual_csv(const std::string& path, const std::vector<ResidualReport>& reports,
                        const ReportMeta& meta);
void write_identity_csv(const std::string& path,
                        const std::vector<std::pair<int, std::vector<IdentityCase>>>& by_size,
                        const ReportMeta& meta);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           const ReportMeta& meta);
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec,
                          const ReportMeta& meta, int n);
void write_regularity_csv(const std::string& path, const RegularityReport& rep,
                          const ReportMeta& meta, int n);

// Free-form JSON summary written next to the CSVs.
void write_json_summary(const std::string& path, const std::string& json_text);

}  // namespace anl
