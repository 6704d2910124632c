#include "mpet.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "assembly.hpp"
#include "mesh.hpp"
#include "problem.hpp"
#include "runner.hpp"
#include "schemes.hpp"

namespace {

thread_local std::string g_last_error;

mpet_status fail(mpet_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
mpet_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(MPET_ERR_INVALID_ARGUMENT, e.what());
  } catch (const mpet::SingularMatrixError& e) {
    return fail(MPET_ERR_SINGULAR_MATRIX, e.what());
  } catch (const std::exception& e) {
    return fail(MPET_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MPET_ERR_INTERNAL, "unknown error");
  }
}

std::vector<mpet::Scheme> parse_scheme_list(const char* schemes) {
  using mpet::Scheme;
  if (!schemes || std::strcmp(schemes, "all") == 0)
    return {Scheme::uzawa, Scheme::fixed_stress, Scheme::gmres};
  std::vector<Scheme> out;
  std::string s(schemes), item;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      auto parsed = mpet::parse_scheme(item);
      if (!parsed) throw std::invalid_argument("unknown scheme '" + item + "'");
      out.push_back(*parsed);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("no scheme given");
  return out;
}

mpet::RunOptions to_run_options(const mpet_run_options* options) {
  mpet::RunOptions run;
  if (!options) return run;
  run.tau = options->tau;
  run.eta = options->eta;
  run.tol_factor = options->tol_factor;
  run.max_iterations = options->max_iterations;
  run.seed = options->seed;
  if (options->subdivisions > 0) run.mesh_levels = {options->subdivisions};
  run.threads = options->threads;
  run.diagnostics = options->diagnostics != 0;
  run.include_h128 = options->include_h128 != 0;
  run.emit_plot_script = options->emit_plot_script != 0;
  run.schemes = parse_scheme_list(options->schemes);
  if (options->export_blocks_dir) run.export_dir = options->export_blocks_dir;
  return run;
}

}  // namespace

struct mpet_problem {
  mpet::ProblemSpec spec;
  std::shared_ptr<const mpet::Mesh> mesh;
  mpet::BlockSystem sys;
  std::unique_ptr<mpet::SolverWorkspace> workspace;
  mpet::SolverConfig config;
};

struct mpet_solution {
  int iterations = 0;
  bool converged = false;
  double residual_ratio = 0.0;
  double elapsed_seconds = 0.0;
  double mass_residual = 0.0;
};

extern "C" {

void mpet_run_options_init(mpet_run_options* options) {
  if (!options) return;
  options->tau = 1.0;
  options->eta = 10.0;
  options->tol_factor = 1e8;
  options->max_iterations = 500;
  options->seed = 2023;
  options->subdivisions = 0;
  options->threads = 0;
  options->diagnostics = 0;
  options->include_h128 = 0;
  options->emit_plot_script = 1;
  options->schemes = "all";
  options->export_blocks_dir = nullptr;
}

mpet_status mpet_run_suite(const char* suite, const mpet_run_options* options, const char* csv_path) {
  return guarded([&]() -> mpet_status {
    if (!suite || !csv_path) throw std::invalid_argument("mpet_run_suite: null argument");
    const mpet::RunOptions run = to_run_options(options);
    const mpet::ExperimentSuite experiment = mpet::make_suite(suite, run);
    const auto records = mpet::run_suite(experiment, run);
    mpet::write_csv(records, csv_path);
    if (run.emit_plot_script) mpet::emit_plot_script(csv_path);
    return MPET_OK;
  });
}

mpet_status mpet_problem_create(const char* suite, int networks, int subdivisions,
                                const mpet_run_options* options, mpet_problem** out) {
  return guarded([&]() -> mpet_status {
    if (!suite || !out) throw std::invalid_argument("mpet_problem_create: null argument");
    if (subdivisions < 1) throw std::invalid_argument("mpet_problem_create: subdivisions must be >= 1");
    const std::string name(suite);
    mpet::ProblemSpec spec;
    if (name == "biot")
      spec = mpet::make_biot_manufactured(1.0, 1.0, 1.0);
    else if (name == "barenblatt")
      spec = mpet::make_barenblatt();
    else if (name == "four_network")
      spec = mpet::make_four_network();
    else if (name == "scaling")
      spec = mpet::make_scaling(networks > 0 ? networks : 1);
    else
      throw std::invalid_argument("mpet_problem_create: unknown suite '" + name + "'");

    auto problem = std::make_unique<mpet_problem>();
    problem->spec = std::move(spec);
    mpet::AssemblyOptions assembly;
    if (options) {
      assembly.eta = options->eta;
      if (problem->spec.raw) problem->spec.raw->tau = options->tau;
      problem->config.tol_factor = options->tol_factor;
      problem->config.max_iterations = options->max_iterations;
      problem->config.seed = options->seed;
    }
    problem->mesh = std::make_shared<const mpet::Mesh>(mpet::build_structured_mesh(subdivisions));
    problem->sys = mpet::assemble_system(problem->mesh, problem->spec, assembly);
    *out = problem.release();
    return MPET_OK;
  });
}

mpet_status mpet_problem_create_from_file(const char* params_path, const double* boundary_pressures,
                                          int networks, int subdivisions,
                                          const mpet_run_options* options, mpet_problem** out) {
  return guarded([&]() -> mpet_status {
    if (!params_path || !boundary_pressures || !out)
      throw std::invalid_argument("mpet_problem_create_from_file: null argument");
    mpet::RawModelParams params = mpet::read_params_file(params_path);
    if (params.networks != networks)
      throw std::invalid_argument("mpet_problem_create_from_file: network count mismatch");
    mpet::ProblemSpec spec;
    spec.name = "custom";
    spec.networks = networks;
    if (options) params.tau = options->tau;
    spec.raw = params;
    const std::vector<double> pressures(boundary_pressures, boundary_pressures + networks);
    for (int side = 0; side < 4; ++side) {
      mpet::SegmentBC& seg = spec.bc[side];
      seg.pressure_dirichlet = true;
      seg.pressure_value = pressures;
      if (side == static_cast<int>(mpet::BoundaryLabel::left))
        seg.displacement_clamped = true;
      else if (side == static_cast<int>(mpet::BoundaryLabel::top))
        seg.traction = mpet::Vec2(0.0, -1.0);
    }
    auto problem = std::make_unique<mpet_problem>();
    problem->spec = std::move(spec);
    mpet::AssemblyOptions assembly;
    if (options) {
      assembly.eta = options->eta;
      problem->config.tol_factor = options->tol_factor;
      problem->config.max_iterations = options->max_iterations;
      problem->config.seed = options->seed;
    }
    problem->mesh = std::make_shared<const mpet::Mesh>(mpet::build_structured_mesh(subdivisions));
    problem->sys = mpet::assemble_system(problem->mesh, problem->spec, assembly);
    *out = problem.release();
    return MPET_OK;
  });
}

void mpet_problem_free(mpet_problem* problem) { delete problem; }

mpet_status mpet_problem_solve(mpet_problem* problem, const char* scheme, mpet_solution** out) {
  return guarded([&]() -> mpet_status {
    if (!problem || !scheme || !out) throw std::invalid_argument("mpet_problem_solve: null argument");
    const auto parsed = mpet::parse_scheme(scheme);
    if (!parsed) throw std::invalid_argument("mpet_problem_solve: unknown scheme");
    if (!problem->workspace)
      problem->workspace = std::make_unique<mpet::SolverWorkspace>(problem->sys);
    auto [x, report] = mpet::run_scheme(*problem->workspace, *parsed, problem->config);

    auto solution = std::make_unique<mpet_solution>();
    solution->iterations = report.iterations;
    solution->converged = report.converged;
    solution->residual_ratio = report.residual_ratio();
    solution->elapsed_seconds = report.solve_seconds + problem->workspace->setup_seconds();
    const mpet::BlockSystem& sys = problem->sys;
    const mpet::Vec mass = sys.rhs_g - (sys.B_v.apply(sys.v_part(x)) - sys.C_mat.apply(sys.p_part(x)) +
                                        sys.B_u.apply(sys.u_part(x)));
    solution->mass_residual = mass.size() ? mass.cwiseAbs().maxCoeff() : 0.0;
    if (!report.converged) {
      *out = solution.release();
      return fail(MPET_ERR_NO_CONVERGENCE, "scheme did not reach the residual reduction target");
    }
    *out = solution.release();
    return MPET_OK;
  });
}

mpet_status mpet_problem_export_blocks(const mpet_problem* problem, const char* directory) {
  return guarded([&]() -> mpet_status {
    if (!problem || !directory)
      throw std::invalid_argument("mpet_problem_export_blocks: null argument");
    mpet::export_blocks(problem->sys, directory);
    return MPET_OK;
  });
}

mpet_status mpet_problem_dump_mesh(const mpet_problem* problem, const char* path) {
  return guarded([&]() -> mpet_status {
    if (!problem || !path) throw std::invalid_argument("mpet_problem_dump_mesh: null argument");
    std::ofstream out(path);
    if (!out) return fail(MPET_ERR_IO, std::string("cannot open ") + path);
    mpet::dump_mesh(*problem->mesh, out);
    return MPET_OK;
  });
}

mpet_status mpet_problem_dof_counts(const mpet_problem* problem, int* flux, int* pressure,
                                    int* displacement) {
  return guarded([&]() -> mpet_status {
    if (!problem) throw std::invalid_argument("mpet_problem_dof_counts: null argument");
    if (flux) *flux = problem->sys.flux_size();
    if (pressure) *pressure = problem->sys.pressure_size();
    if (displacement) *displacement = problem->sys.disp_dofs;
    return MPET_OK;
  });
}

void mpet_solution_free(mpet_solution* solution) { delete solution; }

mpet_status mpet_solution_iterations(const mpet_solution* solution, int* iterations) {
  if (!solution || !iterations) return fail(MPET_ERR_INVALID_ARGUMENT, "null argument");
  *iterations = solution->iterations;
  return MPET_OK;
}

mpet_status mpet_solution_converged(const mpet_solution* solution, int* converged) {
  if (!solution || !converged) return fail(MPET_ERR_INVALID_ARGUMENT, "null argument");
  *converged = solution->converged ? 1 : 0;
  return MPET_OK;
}

mpet_status mpet_solution_residual_ratio(const mpet_solution* solution, double* ratio) {
  if (!solution || !ratio) return fail(MPET_ERR_INVALID_ARGUMENT, "null argument");
  *ratio = solution->residual_ratio;
  return MPET_OK;
}

mpet_status mpet_solution_elapsed_seconds(const mpet_solution* solution, double* seconds) {
  if (!solution || !seconds) return fail(MPET_ERR_INVALID_ARGUMENT, "null argument");
  *seconds = solution->elapsed_seconds;
  return MPET_OK;
}

mpet_status mpet_solution_mass_residual(const mpet_solution* solution, double* max_residual) {
  if (!solution || !max_residual) return fail(MPET_ERR_INVALID_ARGUMENT, "null argument");
  *max_residual = solution->mass_residual;
  return MPET_OK;
}

const char* mpet_status_name(mpet_status status) {
  switch (status) {
    case MPET_OK: return "ok";
    case MPET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MPET_ERR_SINGULAR_MATRIX: return "singular matrix";
    case MPET_ERR_IO: return "io error";
    case MPET_ERR_NO_CONVERGENCE: return "no convergence";
    case MPET_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* mpet_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
