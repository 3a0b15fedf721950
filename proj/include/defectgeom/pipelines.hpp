#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "defectgeom/config.hpp"

namespace defectgeom {

struct ReportRow {
  std::string name;
  std::string formula;
  double residual = 0.0;
  double tolerance = 0.0;
  bool informational = false;  // shown, never fails the report
  bool pass = true;
  std::optional<double> order;
};

struct VerificationReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;

  bool all_pass() const;
  const ReportRow* find(const std::string& name) const;
  std::string to_csv() const;
  std::string to_table() const;
};

double tolerance_of(const RunConfig& cfg, const std::string& name);

// Rows on cfg.grid; with cfg.refine > 0 the order column comes from the two finest levels.
VerificationReport build_report(const RunConfig& cfg);

// Each returns the process exit code and writes into cfg.output.dir.
int run_analyze(const RunConfig& cfg, std::ostream& log);
int run_verify(const RunConfig& cfg, std::ostream& log);
int run_transport(const RunConfig& cfg, std::ostream& log);
int run_geodesic(const RunConfig& cfg, std::ostream& log);
int run_evolve(const RunConfig& cfg, std::ostream& log);

}  // namespace defectgeom
