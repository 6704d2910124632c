#include "schemes.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mpet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::uzawa: return "uzawa";
    case Scheme::fixed_stress: return "fixed-stress";
    case Scheme::gmres: return "gmres";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(const std::string& name) {
  if (name == "uzawa") return Scheme::uzawa;
  if (name == "fixed-stress" || name == "fixed_stress") return Scheme::fixed_stress;
  if (name == "gmres") return Scheme::gmres;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (tol_factor <= 1.0) throw std::invalid_argument("SolverConfig: tol_factor must be > 1");
  if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
}

double IterationReport::residual_ratio() const {
  if (residual_history.size() < 2 || residual_history.front() == 0.0) return 0.0;
  return residual_history.back() / residual_history.front();
}

double IterationReport::max_contraction(int skip) const {
  double worst = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = static_cast<std::size_t>(skip); i < contraction_history.size(); ++i)
    if (std::isnan(worst) || contraction_history[i] > worst) worst = contraction_history[i];
  return worst;
}

SolverWorkspace::SolverWorkspace(const BlockSystem& sys) : sys_(&sys) {
  const auto t0 = Clock::now();
  aug_ = augment(sys);
  flux_fact_ = factorize(aug_.flux_block, true, "augmented flux block");
  au_fact_ = factorize(sys.A_u, true, "elasticity block");
  setup_seconds_ = seconds_since(t0);
}

Vec SolverWorkspace::apply_S_inv(const Vec& p) const { return aug_.apply_M(p); }

Vec SolverWorkspace::apply_gs_preconditioner(const Vec& r) const {
  const BlockSystem& sys = *sys_;
  Vec z(r.size());
  const Vec zv = flux_fact_.solve(sys.v_part(r));
  Vec zp = apply_S_inv(Vec(sys.p_part(r) + sys.B_v.apply(zv)));
  sys.project_pressure_nullspace(zp);
  const Vec zu = au_fact_.solve(Vec(sys.u_part(r) - sys.B_u.apply_transpose(zp)));
  sys.v_part(z) = zv;
  sys.p_part(z) = zp;
  sys.u_part(z) = zu;
  return z;
}

Vec SolverWorkspace::augmented_residual(const Vec& x, bool homogeneous) const {
  if (homogeneous) return -aug_.apply(x);
  return aug_.rhs - aug_.apply(x);
}

double SolverWorkspace::precond_residual_norm(const Vec& x, bool homogeneous) const {
  return apply_gs_preconditioner(augmented_residual(x, homogeneous)).norm();
}

Vec SolverWorkspace::random_start(std::uint64_t seed) const {
  Vec x = random_vector(sys_->total_size(), seed);
  // Scale the start vector to the data: the relative stopping rule is
  // scale-invariant for all three schemes, while the absolute accuracy at the
  // stopping point stays commensurate with the solution.
  if (aug_.rhs.size() > 0 && !aug_.rhs.isZero(0.0)) {
    const double scale = apply_gs_preconditioner(aug_.rhs).norm() / x.norm();
    if (scale > 0.0 && std::isfinite(scale)) x *= scale;
  }
  // Unconstrained constant pressure modes are invisible to every scheme and
  // must not enter through the start vector.
  auto p = sys_->p_part(x);
  sys_->project_pressure_nullspace(p);
  return x;
}

double SolverWorkspace::pressure_norm(const Vec& p) const {
  const BlockSystem& sys = *sys_;
  const int n = sys.networks;
  const int nc = sys.pressure_per_net;
  const Eigen::MatrixXd& w = sys.pressure_norm_coeff;
  double acc = 0.0;
  Eigen::VectorXd pc(n);
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < n; ++i) pc[i] = p[i * nc + c];
    acc += sys.cell_area[c] * pc.dot(w * pc);
  }
  return std::sqrt(std::max(acc, 0.0));
}

double SolverWorkspace::displacement_norm(const Vec& u) const {
  const BlockSystem& sys = *sys_;
  const double e2 = u.dot(sys.strain_form.apply(u));
  const double d2 = u.dot(sys.divdiv_form.apply(u));
  return std::sqrt(std::max(e2 + sys.scaled.lambda * d2, 0.0));
}

double SolverWorkspace::flux_norm(const Vec& v) const {
  const BlockSystem& sys = *sys_;
  const int n = sys.networks;
  const int nc = sys.pressure_per_net;
  double acc = v.dot(sys.A_v.apply(v));
  const Vec bv = sys.B_v.apply(v);  // -(I x M_p) Div v
  Eigen::VectorXd dc(n);
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < n; ++i) dc[i] = -bv[i * nc + c] / sys.cell_area[c];
    acc += sys.cell_area[c] * dc.dot(sys.S_coeff_inv * dc);
  }
  return std::sqrt(std::max(acc, 0.0));
}

double SolverWorkspace::solution_norm(const Vec& x) const {
  return pressure_norm(sys_->p_part(x)) + displacement_norm(sys_->u_part(x));
}

void SolverWorkspace::ensure_fixed_stress(double L) {
  if (fs_fact_ && fs_L_ == L) return;
  const BlockSystem& sys = *sys_;
  fs_lambda_l_ = assemble_pressure_block(
      sys.cell_area, Eigen::MatrixXd::Constant(sys.networks, sys.networks, L));
  const int nv = sys.flux_size();
  const int np = sys.pressure_size();
  std::vector<Triplet> triplets;
  auto add_block = [&triplets](const SparseMatrix& m, int row_off, int col_off, double scale,
                               bool transpose) {
    const auto& a = m.eigen();
    for (int r = 0; r < a.outerSize(); ++r)
      for (SparseMatrix::Storage::InnerIterator it(a, r); it; ++it) {
        if (transpose)
          triplets.emplace_back(col_off + it.col(), row_off + it.row(), scale * it.value());
        else
          triplets.emplace_back(row_off + it.row(), col_off + it.col(), scale * it.value());
      }
  };
  add_block(sys.A_v, 0, 0, 1.0, false);
  add_block(sys.B_v, nv, 0, 1.0, false);
  add_block(sys.B_v, nv, 0, 1.0, true);  // B_v^T in the top-right block
  add_block(sys.C_mat, nv, nv, -1.0, false);
  add_block(fs_lambda_l_, nv, nv, -1.0, false);
  fs_fact_ = factorize(SparseMatrix::from_triplets(nv + np, nv + np, triplets), false,
                       "coupled flux-pressure block");
  fs_L_ = L;
}

const Factorization& SolverWorkspace::fixed_stress_factor() const {
  if (!fs_fact_) throw std::logic_error("fixed_stress_factor: not prepared");
  return *fs_fact_;
}

Vec SolverWorkspace::monolithic_solve() const {
  const BlockSystem& sys = *sys_;
  if (!mono_fact_) {
    const int nv = sys.flux_size();
    const int np = sys.pressure_size();
    const int nu = sys.disp_dofs;
    int extra = 0;
    for (bool flag : sys.pressure_nullspace)
      if (flag) ++extra;
    const int total = nv + np + nu + extra;
    std::vector<Triplet> triplets;
    auto add_block = [&triplets](const SparseMatrix& m, int row_off, int col_off, double scale,
                                 bool transpose) {
      const auto& a = m.eigen();
      for (int r = 0; r < a.outerSize(); ++r)
        for (SparseMatrix::Storage::InnerIterator it(a, r); it; ++it) {
          if (transpose)
            triplets.emplace_back(col_off + it.col(), row_off + it.row(), scale * it.value());
          else
            triplets.emplace_back(row_off + it.row(), col_off + it.col(), scale * it.value());
        }
    };
    add_block(sys.A_v, 0, 0, 1.0, false);
    add_block(sys.B_v, nv, 0, 1.0, false);
    add_block(sys.B_v, nv, 0, 1.0, true);
    add_block(sys.C_mat, nv, nv, -1.0, false);
    add_block(sys.B_u, nv, nv + np, 1.0, false);
    add_block(sys.B_u, nv, nv + np, 1.0, true);
    add_block(sys.A_u, nv + np, nv + np, 1.0, false);
    int k = nv + np + nu;
    for (int i = 0; i < sys.networks; ++i) {
      if (!sys.pressure_nullspace[i]) continue;
      for (int c = 0; c < sys.pressure_per_net; ++c) {
        const int pdof = nv + i * sys.pressure_per_net + c;
        triplets.emplace_back(k, pdof, sys.cell_area[c]);
        triplets.emplace_back(pdof, k, sys.cell_area[c]);
      }
      ++k;
    }
    mono_fact_ = factorize(SparseMatrix::from_triplets(total, total, triplets), false,
                           "monolithic system");
    mono_size_ = total;
  }
  Vec rhs = Vec::Zero(mono_size_);
  rhs.head(sys.total_size()) << sys.rhs_v, sys.rhs_g, sys.rhs_f;
  const Vec full = mono_fact_->solve(rhs);
  return full.head(sys.total_size());
}

Vec richardson_gs_step(const SolverWorkspace& w, const Vec& x, bool homogeneous) {
  return x + w.apply_gs_preconditioner(w.augmented_residual(x, homogeneous));
}

DiagnosticsReport diagnostics(const SolverWorkspace& w, const std::vector<Vec>& iterates,
                              const Vec& reference, bool with_identity) {
  const BlockSystem& sys = w.system();
  DiagnosticsReport d;
  for (std::size_t m = 0; m < iterates.size(); ++m) {
    const Vec e = iterates[m] - reference;
    d.pressure_error_norms.push_back(w.pressure_norm(sys.p_part(e)));
    d.displacement_error_norms.push_back(w.displacement_norm(sys.u_part(e)));
    d.flux_error_norms.push_back(w.flux_norm(sys.v_part(e)));
    if (m >= 1) {
      const double prev = d.pressure_error_norms[m - 1];
      if (prev > 0.0) d.contraction_history.push_back(d.pressure_error_norms[m] / prev);
      if (with_identity) {
        const Vec ev = sys.v_part(e);
        const Vec ep = sys.p_part(e);
        // (e_p, Div e_v) against (A_v e_v, e_v); B_v carries -(I x M_p) Div.
        const double lhs = -ep.dot(sys.B_v.apply(ev));
        const double rhs = ev.dot(sys.A_v.apply(ev));
        const double denom = std::max(rhs, std::numeric_limits<double>::min());
        d.identity_residuals.push_back(std::abs(lhs - rhs) / denom);
      }
    }
  }
  return d;
}

namespace {

void attach_diagnostics(IterationReport& report, const DiagnosticsReport& d) {
  report.pressure_error_norms = d.pressure_error_norms;
  report.displacement_error_norms = d.displacement_error_norms;
  report.flux_error_norms = d.flux_error_norms;
  report.contraction_history = d.contraction_history;
  report.identity_residuals = d.identity_residuals;
}

}  // namespace

std::pair<Vec, IterationReport> uzawa_solve(SolverWorkspace& w, const SolverConfig& config,
                                            const Vec* reference) {
  config.validate();
  const BlockSystem& sys = w.system();
  const AugmentedSystem& aug = w.augmented();
  const auto t0 = Clock::now();
  IterationReport report;
  Vec x = config.initial_guess ? *config.initial_guess : w.random_start(config.seed);
  if (x.size() != sys.total_size()) throw std::invalid_argument("uzawa_solve: bad initial guess size");
  const bool hom = config.homogeneous;
  const Vec rv = hom ? Vec(Vec::Zero(sys.flux_size())) : sys.rhs_v;
  const Vec rg = hom ? Vec(Vec::Zero(sys.pressure_size())) : sys.rhs_g;
  const Vec rf = hom ? Vec(Vec::Zero(sys.disp_dofs)) : sys.rhs_f;

  std::vector<Vec> iterates;
  if (reference) iterates.push_back(x);

  const double z0 = w.precond_residual_norm(x, hom);
  report.residual_history.push_back(z0);
  if (z0 == 0.0) {
    report.converged = true;
    report.solve_seconds = seconds_since(t0);
    return {x, report};
  }
  const double target = z0 / config.tol_factor;

  Vec v = sys.v_part(x), p = sys.p_part(x), u = sys.u_part(x);
  for (int k = 1; k <= config.max_iterations; ++k) {
    // Flux solve against the augmented block.
    const Vec t = rg + sys.C_mat.apply(p) - sys.B_u.apply(u);
    v = w.flux_factor().solve(Vec(rv + sys.B_v.apply_transpose(Vec(aug.apply_M(t) - p))));
    // Pressure update through the per-cell dense solves.
    p += w.apply_S_inv(Vec(-rg + sys.B_v.apply(v) - sys.C_mat.apply(p) + sys.B_u.apply(u)));
    sys.project_pressure_nullspace(p);
    // Elasticity solve.
    u = w.elasticity_factor().solve(Vec(rf - sys.B_u.apply_transpose(p)));

    sys.v_part(x) = v;
    sys.p_part(x) = p;
    sys.u_part(x) = u;
    if (reference) iterates.push_back(x);
    const double z = w.precond_residual_norm(x, hom);
    report.residual_history.push_back(z);
    report.iterations = k;
    if (z <= target) {
      report.converged = true;
      break;
    }
  }
  if (reference) attach_diagnostics(report, diagnostics(w, iterates, *reference, true));
  report.solve_seconds = seconds_since(t0);
  return {x, report};
}

std::pair<Vec, IterationReport> fixed_stress_solve(SolverWorkspace& w, const SolverConfig& config,
                                                   double L, const Vec* reference) {
  config.validate();
  if (L <= 0.0) throw std::invalid_argument("fixed_stress_solve: L must be > 0");
  const BlockSystem& sys = w.system();
  const auto t0 = Clock::now();
  w.ensure_fixed_stress(L);
  IterationReport report;
  Vec x = config.initial_guess ? *config.initial_guess : w.random_start(config.seed);
  if (x.size() != sys.total_size())
    throw std::invalid_argument("fixed_stress_solve: bad initial guess size");
  const bool hom = config.homogeneous;
  const Vec rv = hom ? Vec(Vec::Zero(sys.flux_size())) : sys.rhs_v;
  const Vec rg = hom ? Vec(Vec::Zero(sys.pressure_size())) : sys.rhs_g;
  const Vec rf = hom ? Vec(Vec::Zero(sys.disp_dofs)) : sys.rhs_f;

  std::vector<Vec> iterates;
  if (reference) iterates.push_back(x);

  const double z0 = w.precond_residual_norm(x, hom);
  report.residual_history.push_back(z0);
  if (z0 == 0.0) {
    report.converged = true;
    report.solve_seconds = seconds_since(t0);
    return {x, report};
  }
  const double target = z0 / config.tol_factor;

  const int nv = sys.flux_size();
  const int np = sys.pressure_size();
  Vec p = sys.p_part(x), u = sys.u_part(x);
  for (int k = 1; k <= config.max_iterations; ++k) {
    Vec rhs(nv + np);
    rhs.head(nv) = rv;
    rhs.tail(np) = rg - w.fixed_stress_lambda_l().apply(p) - sys.B_u.apply(u);
    const Vec vp = w.fixed_stress_factor().solve(rhs);
    p = vp.tail(np);
    sys.project_pressure_nullspace(p);
    u = w.elasticity_factor().solve(Vec(rf - sys.B_u.apply_transpose(p)));

    sys.v_part(x) = vp.head(nv);
    sys.p_part(x) = p;
    sys.u_part(x) = u;
    if (reference) iterates.push_back(x);
    const double z = w.precond_residual_norm(x, hom);
    report.residual_history.push_back(z);
    report.iterations = k;
    if (z <= target) {
      report.converged = true;
      break;
    }
  }
  if (reference) attach_diagnostics(report, diagnostics(w, iterates, *reference, false));
  report.solve_seconds = seconds_since(t0);
  return {x, report};
}

std::pair<Vec, IterationReport> gmres_outer_solve(SolverWorkspace& w, const SolverConfig& config,
                                                  const Vec* reference) {
  config.validate();
  const BlockSystem& sys = w.system();
  const auto t0 = Clock::now();
  IterationReport report;
  Vec x0 = config.initial_guess ? *config.initial_guess : w.random_start(config.seed);
  {
    auto p0 = sys.p_part(x0);
    sys.project_pressure_nullspace(p0);
  }
  const Vec b = config.homogeneous ? Vec(Vec::Zero(sys.total_size())) : w.augmented().rhs;

  std::vector<Vec> iterates;
  if (reference) iterates.push_back(x0);
  std::function<void(int, const Vec&)> callback;
  if (reference) callback = [&iterates](int, const Vec& xk) { iterates.push_back(xk); };

  GmresResult result = gmres([&w](const Vec& y) { return w.augmented().apply(y); },
                             [&w](const Vec& r) { return w.apply_gs_preconditioner(r); }, b,
                             config.tol_factor, config.max_iterations, config.seed, &x0, callback);
  report.residual_history = result.residual_history;
  report.iterations = result.iterations;
  report.converged = result.converged;
  if (reference) attach_diagnostics(report, diagnostics(w, iterates, *reference, false));
  report.solve_seconds = seconds_since(t0);
  return {std::move(result.x), report};
}

std::pair<Vec, IterationReport> run_scheme(SolverWorkspace& w, Scheme scheme,
                                           const SolverConfig& config, const Vec* reference) {
  switch (scheme) {
    case Scheme::uzawa: return uzawa_solve(w, config, reference);
    case Scheme::fixed_stress:
      return fixed_stress_solve(w, config, w.system().stab.L_fixed_stress, reference);
    case Scheme::gmres: return gmres_outer_solve(w, config, reference);
  }
  throw std::logic_error("run_scheme: unknown scheme");
}

}  // namespace mpet
