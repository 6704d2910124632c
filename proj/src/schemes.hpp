#pragma once

#include <optional>
#include <string>

#include "assembly.hpp"

namespace mpet {

enum class Scheme { uzawa, fixed_stress, gmres };

const char* scheme_name(Scheme scheme);
std::optional<Scheme> parse_scheme(const std::string& name);

struct SolverConfig {
  double tol_factor = 1e8;  // preconditioned-residual reduction target
  int max_iterations = 500;
  std::uint64_t seed = 2023;
  // Iterate on zero data. The iterates of the stationary schemes are then
  // exactly the iteration errors, which keeps the convergence diagnostics
  // free of reference-solution roundoff.
  bool homogeneous = false;
  std::optional<Vec> initial_guess;  // replaces the seeded random start

  void validate() const;
};

struct IterationReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // preconditioned residual norms, [0] at the start vector
  // Filled when a reference solution is supplied:
  std::vector<double> pressure_error_norms;      // per iterate, weighted pressure norm
  std::vector<double> displacement_error_norms;  // per iterate, energy norm
  std::vector<double> flux_error_norms;          // per iterate
  std::vector<double> contraction_history;       // ratios of successive pressure error norms
  std::vector<double> identity_residuals;        // decoupled scheme only, relative
  double solve_seconds = 0.0;

  double residual_ratio() const;
  // Largest contraction ratio, skipping the given number of leading ratios.
  double max_contraction(int skip = 1) const;
};

// Factorizations and operators shared by the schemes for one assembled
// system: the augmented flux block, the elasticity block, the dense per-cell
// pressure solves, and on demand the coupled flux-pressure block and the
// monolithic matrix.
class SolverWorkspace {
 public:
  explicit SolverWorkspace(const BlockSystem& sys);

  const BlockSystem& system() const { return *sys_; }
  const AugmentedSystem& augmented() const { return aug_; }

  // Block lower-triangular solve with diagonal (A_v + B_v^T M B_v, S, A_u).
  Vec apply_gs_preconditioner(const Vec& r) const;
  Vec augmented_residual(const Vec& x, bool homogeneous) const;
  double precond_residual_norm(const Vec& x, bool homogeneous) const;

  Vec apply_S_inv(const Vec& p) const;  // dense n x n solve per cell
  Vec random_start(std::uint64_t seed) const;

  // Weighted norms of the convergence theory.
  double pressure_norm(const Vec& p) const;
  double displacement_norm(const Vec& u) const;
  double flux_norm(const Vec& v) const;
  double solution_norm(const Vec& x) const;  // pressure + displacement norms of a stacked vector

  const Factorization& flux_factor() const { return flux_fact_; }
  const Factorization& elasticity_factor() const { return au_fact_; }

  void ensure_fixed_stress(double L);
  const Factorization& fixed_stress_factor() const;
  const SparseMatrix& fixed_stress_lambda_l() const { return fs_lambda_l_; }

  // Direct solve of the unaugmented system (constant pressure modes pinned by
  // a Lagrange multiplier when flagged).
  Vec monolithic_solve() const;

  double setup_seconds() const { return setup_seconds_; }

 private:
  const BlockSystem* sys_;
  AugmentedSystem aug_;
  Factorization flux_fact_, au_fact_;
  std::optional<Factorization> fs_fact_;
  SparseMatrix fs_lambda_l_;
  double fs_L_ = -1.0;
  mutable std::optional<Factorization> mono_fact_;
  mutable int mono_size_ = 0;
  double setup_seconds_ = 0.0;
};

// One block-Gauss-Seidel-preconditioned Richardson step on the augmented
// system; algebraically identical to one sweep of the decoupled scheme.
Vec richardson_gs_step(const SolverWorkspace& w, const Vec& x, bool homogeneous = false);

std::pair<Vec, IterationReport> uzawa_solve(SolverWorkspace& w, const SolverConfig& config,
                                            const Vec* reference = nullptr);
std::pair<Vec, IterationReport> fixed_stress_solve(SolverWorkspace& w, const SolverConfig& config,
                                                   double L, const Vec* reference = nullptr);
std::pair<Vec, IterationReport> gmres_outer_solve(SolverWorkspace& w, const SolverConfig& config,
                                                  const Vec* reference = nullptr);

std::pair<Vec, IterationReport> run_scheme(SolverWorkspace& w, Scheme scheme,
                                           const SolverConfig& config, const Vec* reference = nullptr);

// Error norms, contraction ratios and the flux-pressure identity residuals
// along a sequence of iterates.
struct DiagnosticsReport {
  std::vector<double> pressure_error_norms;
  std::vector<double> displacement_error_norms;
  std::vector<double> flux_error_norms;
  std::vector<double> contraction_history;
  std::vector<double> identity_residuals;
};
DiagnosticsReport diagnostics(const SolverWorkspace& w, const std::vector<Vec>& iterates,
                              const Vec& reference, bool with_identity);

}  // namespace mpet
