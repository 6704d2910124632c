#pragma once

#include <functional>
#include <string>
#include <vector>

#include "problem.hpp"
#include "schemes.hpp"

namespace mpet {

struct RunOptions {
  std::vector<int> mesh_levels;  // subdivisions; empty = suite defaults
  std::vector<Scheme> schemes = {Scheme::uzawa, Scheme::fixed_stress, Scheme::gmres};
  double tau = 1.0;
  double eta = 10.0;
  double tol_factor = 1e8;
  int max_iterations = 500;
  std::uint64_t seed = 2023;
  int threads = 0;             // 0 = hardware concurrency
  bool diagnostics = false;    // direct reference solve + contraction ratios
  bool include_h128 = false;   // adds N = 128 to the default levels
  std::string export_dir;      // Matrix Market export per run when non-empty
  bool emit_plot_script = true;
};

struct GridPoint {
  std::string description;
  std::function<ProblemSpec()> make;
};

struct ExperimentSuite {
  std::string name;
  std::vector<GridPoint> points;
  std::vector<int> default_levels;
};

// Suites: biot (manufactured single-network parameter sweep), barenblatt
// (two-network cantilever), four_network, scaling (n in {1,2,4,8} at N = 32).
ExperimentSuite make_suite(const std::string& name, const RunOptions& options);
std::vector<std::string> suite_names();

struct RunRecord {
  std::string suite;
  std::string scheme;
  int networks = 0;
  int subdivisions = 0;
  double lambda = 0.0;  // dimensionless
  std::string param_point;
  int iterations = 0;
  bool converged = false;
  double residual_ratio = 0.0;
  double max_contraction = std::numeric_limits<double>::quiet_NaN();
  double elapsed_s = 0.0;
};

// Executes the full (grid point, mesh level, scheme) matrix in a worker pool;
// rows come back in deterministic grid order regardless of thread count.
std::vector<RunRecord> run_suite(const ExperimentSuite& suite, const RunOptions& options);

void write_csv(const std::vector<RunRecord>& records, const std::string& path);
std::string csv_header();
std::string csv_row(const RunRecord& record);

// Standalone matplotlib script consuming the CSV; written next to it.
void emit_plot_script(const std::string& csv_path);

}  // namespace mpet
