/* C interface of the mpet solver library.
 *
 * All functions return MPET_OK on success; on failure the returned status
 * identifies the error class and mpet_last_error() gives a message for the
 * calling thread. Objects are opaque handles released with the matching
 * _free function. */

#ifndef MPET_H
#define MPET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mpet_status {
  MPET_OK = 0,
  MPET_ERR_INVALID_ARGUMENT = 1,
  MPET_ERR_SINGULAR_MATRIX = 2,
  MPET_ERR_IO = 3,
  MPET_ERR_NO_CONVERGENCE = 4,
  MPET_ERR_INTERNAL = 5
} mpet_status;

typedef struct mpet_problem mpet_problem;
typedef struct mpet_solution mpet_solution;

typedef struct mpet_run_options {
  double tau;            /* time-step size for the physical-parameter suites */
  double eta;            /* tangential-jump penalty weight */
  double tol_factor;     /* preconditioned-residual reduction target */
  int max_iterations;
  uint64_t seed;
  int subdivisions;      /* mesh 1/N; 0 = suite defaults */
  int threads;           /* worker pool size; 0 = hardware */
  int diagnostics;       /* nonzero: reference solve + contraction columns */
  int include_h128;
  int emit_plot_script;
  const char* schemes;   /* "uzawa", "fixed-stress", "gmres" or "all" */
  const char* export_blocks_dir; /* Matrix Market export directory or NULL */
} mpet_run_options;

void mpet_run_options_init(mpet_run_options* options);

/* Runs one experiment suite ("biot", "barenblatt", "four_network",
 * "scaling") over its parameter grid and writes one CSV row per
 * (grid point, mesh level, scheme). */
mpet_status mpet_run_suite(const char* suite, const mpet_run_options* options,
                           const char* csv_path);

/* Single problems. suite selects the problem family; networks is only used
 * by "scaling". */
mpet_status mpet_problem_create(const char* suite, int networks, int subdivisions,
                                const mpet_run_options* options, mpet_problem** out);
/* Problem from a key=value parameter file with the cantilever boundary
 * conditions and prescribed boundary pressures. */
mpet_status mpet_problem_create_from_file(const char* params_path, const double* boundary_pressures,
                                          int networks, int subdivisions,
                                          const mpet_run_options* options, mpet_problem** out);
void mpet_problem_free(mpet_problem* problem);

mpet_status mpet_problem_solve(mpet_problem* problem, const char* scheme, mpet_solution** out);
mpet_status mpet_problem_export_blocks(const mpet_problem* problem, const char* directory);
mpet_status mpet_problem_dump_mesh(const mpet_problem* problem, const char* path);
mpet_status mpet_problem_dof_counts(const mpet_problem* problem, int* flux, int* pressure,
                                    int* displacement);

void mpet_solution_free(mpet_solution* solution);
mpet_status mpet_solution_iterations(const mpet_solution* solution, int* iterations);
mpet_status mpet_solution_converged(const mpet_solution* solution, int* converged);
mpet_status mpet_solution_residual_ratio(const mpet_solution* solution, double* ratio);
mpet_status mpet_solution_elapsed_seconds(const mpet_solution* solution, double* seconds);
/* Residual norms of the conservation equations at the solution, per cell and
 * network; max norm reported. */
mpet_status mpet_solution_mass_residual(const mpet_solution* solution, double* max_residual);

const char* mpet_status_name(mpet_status status);
const char* mpet_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* MPET_H */
