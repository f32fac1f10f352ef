#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/collocation.hpp"
#include "fnls/config.hpp"

namespace fnls {

struct TrackedSummary {
  double omega = 0.0;
  bool alive = false;
  std::string drop_reason;
  std::vector<double> residuals;
  TheoremReport theorem;
  CollocationResult collocation;
  double lattice_residual = 0.0;  // ||F(u)|| through apply_F
};

struct SolveResult {
  IterationState state;
  std::vector<TrackedSummary> tracked;
  nlohmann::json report;          // deterministic given the config
  std::string green_csv;
  std::string exclusions_csv;
  std::string exclusion_records_csv;
  std::string initial_csv;
  nlohmann::json solution;        // every surviving omega with its field
};

// Throws ConfigError, NoGoodCellsError or CertificateError.
SolveResult run_solve(const RunConfig& cfg);
void write_solve_artifacts(const SolveResult& r, const std::string& dir);

struct SweepRow {
  double epsilon = 0.0;
  int stage = 0;
  int N = 0;
  double measure_kept = 0.0;
  double measure_excluded = 0.0;
  double budget = 0.0;
  std::string dominant_reason;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_K = 0.0;  // max over epsilon of excluded / budget at stage j0
  std::string csv;
};

SweepResult run_measure_sweep(const RunConfig& cfg);

// T-tilde_N at (omega, u_{j0}) certified by every applicable route.
nlohmann::json green_audit(const RunConfig& cfg, double omega, int N);

// class id, member count, diameter, nearest separation to another class
std::string partition_dump_csv(int d, double B, int box_radius, bool verify = true);

struct VerifyEntry {
  double omega = 0.0;
  CollocationResult collocation;
  double lattice_residual = 0.0;
  double agreement = 0.0;  // |collocation - lattice| / max(scale, lattice)
  bool ok = false;
};

struct VerifyResult {
  std::vector<VerifyEntry> entries;
  double tolerance = 0.0;
  bool ok = false;
};

// Collocation oracle against every solution stored in a solution document.
VerifyResult verify_solution(const nlohmann::json& solution, double tolerance, int grid = 0);
VerifyResult verify_solution_file(const std::string& path, double tolerance, int grid = 0);

}  // namespace fnls
