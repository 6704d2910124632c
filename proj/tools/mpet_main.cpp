// Command-line front end for the mpet shared library.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpet.h"

namespace {

int parse_mesh_size(const std::string& text) {
  if (text.empty()) return 0;
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const int num = std::stoi(text.substr(0, slash));
    const int den = std::stoi(text.substr(slash + 1));
    if (num != 1 || den < 1) throw CLI::ValidationError("--h expects a fraction 1/N");
    return den;
  }
  const double h = std::stod(text);
  if (h <= 0.0 || h > 1.0) throw CLI::ValidationError("--h expects a mesh size in (0, 1]");
  return static_cast<int>(1.0 / h + 0.5);
}

int report_failure(mpet_status status) {
  std::fprintf(stderr, "error (%s): %s\n", mpet_status_name(status), mpet_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative solvers for single- and multiple-network consolidation problems"};
  app.require_subcommand(1);

  std::string suite, h_text, schemes = "all", out_csv = "results.csv", export_dir, params_file;
  std::uint64_t seed = 2023;
  double tau = 1.0, eta = 10.0, tol_factor = 1e8;
  int max_iterations = 500, threads = 0, networks = 1, dump_n = 4;
  bool diagnostics = false, include_h128 = false, no_plot_script = false;
  std::string dump_path = "mesh.txt";
  std::vector<double> boundary_pressures;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--h", h_text, "mesh size as 1/N (default: suite levels)");
    cmd->add_option("--scheme", schemes, "uzawa|fixed-stress|gmres|all")->capture_default_str();
    cmd->add_option("--seed", seed, "random start seed")->capture_default_str();
    cmd->add_option("--tau", tau, "time-step size (physical-parameter suites)")->capture_default_str();
    cmd->add_option("--eta", eta, "tangential-jump penalty")->capture_default_str();
    cmd->add_option("--tol-factor", tol_factor, "residual reduction target")->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations, "outer iteration cap")->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment suite and write a CSV table");
  run->add_option("suite", suite, "biot|barenblatt|four_network|scaling")->required();
  add_common(run);
  run->add_option("--out", out_csv, "output CSV path")->capture_default_str();
  run->add_option("--export-blocks", export_dir, "Matrix Market export directory");
  run->add_option("--threads", threads, "worker pool size (0 = hardware)")->capture_default_str();
  run->add_flag("--diagnostics", diagnostics, "reference solve + contraction ratios per run");
  run->add_flag("--h128", include_h128, "include the N = 128 level (biot)");
  run->add_flag("--no-plot-script", no_plot_script, "skip writing the plot script");

  CLI::App* solve = app.add_subcommand("solve", "solve a single configuration and print a summary");
  solve->add_option("suite", suite, "biot|barenblatt|four_network|scaling")->required();
  add_common(solve);
  solve->add_option("-n,--networks", networks, "network count (scaling suite)")->capture_default_str();
  solve->add_option("--params", params_file, "key=value parameter file (custom problem)");
  solve->add_option("--boundary-pressures", boundary_pressures,
                    "prescribed boundary pressures for --params problems");
  solve->add_option("--export-blocks", export_dir, "Matrix Market export directory");

  CLI::App* dump = app.add_subcommand("dump-mesh", "write the structured mesh as plain text");
  dump->add_option("N", dump_n, "subdivisions per side")->required();
  dump->add_option("--out", dump_path, "output path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  mpet_run_options options;
  mpet_run_options_init(&options);
  options.tau = tau;
  options.eta = eta;
  options.tol_factor = tol_factor;
  options.max_iterations = max_iterations;
  options.seed = seed;
  options.threads = threads;
  options.diagnostics = diagnostics ? 1 : 0;
  options.include_h128 = include_h128 ? 1 : 0;
  options.emit_plot_script = no_plot_script ? 0 : 1;
  options.schemes = schemes.c_str();
  if (!export_dir.empty()) options.export_blocks_dir = export_dir.c_str();
  try {
    options.subdivisions = h_text.empty() ? 0 : parse_mesh_size(h_text);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }

  if (run->parsed()) {
    const mpet_status status = mpet_run_suite(suite.c_str(), &options, out_csv.c_str());
    if (status != MPET_OK) return report_failure(status);
    std::printf("wrote %s\n", out_csv.c_str());
    return 0;
  }

  if (solve->parsed()) {
    const int n = options.subdivisions > 0 ? options.subdivisions : 32;
    mpet_problem* problem = nullptr;
    mpet_status status;
    if (!params_file.empty()) {
      if (boundary_pressures.empty()) {
        std::fprintf(stderr, "--params needs --boundary-pressures\n");
        return 1;
      }
      status = mpet_problem_create_from_file(params_file.c_str(), boundary_pressures.data(),
                                             static_cast<int>(boundary_pressures.size()), n, &options,
                                             &problem);
    } else {
      status = mpet_problem_create(suite.c_str(), networks, n, &options, &problem);
    }
    if (status != MPET_OK) return report_failure(status);
    if (!export_dir.empty()) {
      status = mpet_problem_export_blocks(problem, export_dir.c_str());
      if (status != MPET_OK) {
        mpet_problem_free(problem);
        return report_failure(status);
      }
    }
    int flux = 0, pressure = 0, displacement = 0;
    mpet_problem_dof_counts(problem, &flux, &pressure, &displacement);
    std::printf("dofs: flux %d, pressure %d, displacement %d\n", flux, pressure, displacement);

    std::vector<std::string> to_run;
    if (schemes == "all")
      to_run = {"uzawa", "fixed-stress", "gmres"};
    else {
      std::string rest = schemes;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        to_run.push_back(rest.substr(0, comma));
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
      }
    }
    int exit_code = 0;
    for (const std::string& scheme : to_run) {
      mpet_solution* solution = nullptr;
      status = mpet_problem_solve(problem, scheme.c_str(), &solution);
      if (status != MPET_OK && status != MPET_ERR_NO_CONVERGENCE) {
        mpet_problem_free(problem);
        return report_failure(status);
      }
      int iterations = 0, converged = 0;
      double ratio = 0.0, elapsed = 0.0, mass = 0.0;
      mpet_solution_iterations(solution, &iterations);
      mpet_solution_converged(solution, &converged);
      mpet_solution_residual_ratio(solution, &ratio);
      mpet_solution_elapsed_seconds(solution, &elapsed);
      mpet_solution_mass_residual(solution, &mass);
      std::printf("%-13s iterations %3d  converged %s  residual ratio %.3e  mass residual %.3e  %.3fs\n",
                  scheme.c_str(), iterations, converged ? "yes" : "no", ratio, mass, elapsed);
      if (!converged) exit_code = 2;
      mpet_solution_free(solution);
    }
    mpet_problem_free(problem);
    return exit_code;
  }

  if (dump->parsed()) {
    mpet_problem* problem = nullptr;
    mpet_status status = mpet_problem_create("scaling", 1, dump_n, &options, &problem);
    if (status != MPET_OK) return report_failure(status);
    status = mpet_problem_dump_mesh(problem, dump_path.c_str());
    mpet_problem_free(problem);
    if (status != MPET_OK) return report_failure(status);
    std::printf("wrote %s\n", dump_path.c_str());
    return 0;
  }

  return 0;
}
