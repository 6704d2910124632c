// Acceptance suite. Runs every gating check at its stated tolerance and
// prints one pass/fail line per check; the exit code is the number of gating
// failures. Check 10 is informational only.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "quadrature.hpp"
#include "runner.hpp"
#include "schemes.hpp"

using namespace mpet;

namespace {

using Clock = std::chrono::steady_clock;

struct CheckResult {
  std::string name;
  bool pass = false;
  bool gating = true;
  std::string detail;
  double seconds = 0.0;
};

template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) break;
      fn(i);
    }
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::shared_ptr<const Mesh> make_mesh(int n) {
  return std::make_shared<const Mesh>(build_structured_mesh(n));
}

// Largest conservation-equation residual at a solution, relative to 1 + |g|.
double mass_residual(const BlockSystem& sys, const Vec& x) {
  const Vec r = sys.rhs_g - (sys.B_v.apply(sys.v_part(x)) - sys.C_mat.apply(sys.p_part(x)) +
                             sys.B_u.apply(sys.u_part(x)));
  double g_norm2 = 0.0;
  for (int i = 0; i < sys.rhs_g.size(); ++i)
    g_norm2 += sys.rhs_g[i] * sys.rhs_g[i] / sys.cell_area[i % sys.pressure_per_net];
  const double max_r = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  return max_r / (1.0 + std::sqrt(g_norm2));
}

std::vector<std::tuple<double, double, double>> biot_grid() {
  std::vector<std::tuple<double, double, double>> grid;  // (alpha_p, lambda, R_inv)
  for (double alpha_p : {1e-8, 1e-6, 1e-4, 1e-2, 1.0})
    for (double lambda : {1.0, 1e2, 1e4, 1e6})
      for (double r_inv : {1e-8, 1e-4, 1.0, 1e4, 1e8}) grid.emplace_back(alpha_p, lambda, r_inv);
  return grid;
}

struct MassLedger {
  std::mutex mutex;
  double worst = 0.0;
  int count = 0;
  void record(double value) {
    std::lock_guard<std::mutex> lock(mutex);
    worst = std::max(worst, value);
    ++count;
  }
};

MassLedger g_mass;

CheckResult check_sherman_morrison() {
  CheckResult result{"rank-one inverse sums match the closed form (100 draws, n = 1..8)"};
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> uniform(0.0, 10.0);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double a = std::nextafter(uniform(gen), 10.0);  // (0, 10]
    const double b = std::nextafter(uniform(gen), 10.0);
    for (int n = 1; n <= 8; ++n) {
      const Eigen::MatrixXd m =
          a * Eigen::MatrixXd::Identity(n, n) + b * Eigen::MatrixXd::Ones(n, n);
      const double dense_sum = m.fullPivLu().inverse().sum();
      const double closed = sherman_morrison_sum(a, b, n);
      worst = std::max(worst, std::abs(dense_sum - closed) / std::abs(closed));
    }
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = worst <= 1e-12 && result.seconds < 1.0;
  std::ostringstream detail;
  detail << "max relative deviation " << worst << ", " << result.seconds << " s";
  result.detail = detail.str();
  return result;
}

CheckResult check_scaling_counts() {
  CheckResult result{"scaling configuration: 1e8 reduction in 3..5 iterations, constant in n"};
  const auto t0 = Clock::now();
  std::vector<int> uzawa_counts, gmres_counts;
  bool converged = true;
  for (int n : {1, 2, 4, 8}) {
    const BlockSystem sys = assemble_system(make_mesh(32), make_scaling(n), {});
    SolverWorkspace workspace(sys);
    SolverConfig config;
    auto [xu, ru] = uzawa_solve(workspace, config);
    auto [xg, rg] = gmres_outer_solve(workspace, config);
    converged = converged && ru.converged && rg.converged;
    uzawa_counts.push_back(ru.iterations);
    gmres_counts.push_back(rg.iterations);
    g_mass.record(mass_residual(sys, workspace.monolithic_solve()));
  }
  bool in_band = true, constant = true;
  for (std::size_t i = 0; i < uzawa_counts.size(); ++i) {
    in_band = in_band && uzawa_counts[i] >= 3 && uzawa_counts[i] <= 5;
    in_band = in_band && gmres_counts[i] >= 3 && gmres_counts[i] <= 5;
    constant = constant && uzawa_counts[i] == uzawa_counts[0] && gmres_counts[i] == gmres_counts[0];
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = converged && in_band && constant && result.seconds < 120.0;
  std::ostringstream detail;
  detail << "uzawa";
  for (int c : uzawa_counts) detail << " " << c;
  detail << ", gmres";
  for (int c : gmres_counts) detail << " " << c;
  detail << ", " << result.seconds << " s";
  result.detail = detail.str();
  return result;
}

CheckResult check_contraction_bound() {
  CheckResult result{"one-step pressure contraction below the theoretical bound"};
  const auto t0 = Clock::now();
  const auto grid = biot_grid();
  std::vector<double> max_ratio(grid.size(), 0.0);
  std::vector<char> converged(grid.size(), 0);
  std::atomic<bool> failed{false};
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    try {
      const auto [alpha_p, lambda, r_inv] = grid[i];
      const BlockSystem sys =
          assemble_system(make_mesh(32), make_biot_manufactured(lambda, r_inv, alpha_p), {});
      SolverWorkspace workspace(sys);
      SolverConfig config;
      config.homogeneous = true;
      const Vec zero = Vec::Zero(sys.total_size());
      auto [x, report] = uzawa_solve(workspace, config, &zero);
      converged[i] = report.converged ? 1 : 0;
      max_ratio[i] = report.max_contraction(1);
    } catch (const std::exception&) {
      failed = true;
    }
  });
  const ScaledParams ref = direct_scaled(1, 1.0, {1.0}, {0.0}, Eigen::MatrixXd::Zero(1, 1));
  const double bound = compute_stabilization(ref).rate_bound() + 0.02;
  double worst = 0.0, worst_large_lambda = 0.0;
  bool all_converged = !failed;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    all_converged = all_converged && converged[i];
    if (!std::isnan(max_ratio[i])) worst = std::max(worst, max_ratio[i]);
    if (std::get<1>(grid[i]) == 1e6 && !std::isnan(max_ratio[i]))
      worst_large_lambda = std::max(worst_large_lambda, max_ratio[i]);
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = all_converged && worst <= bound && worst_large_lambda <= 0.1 &&
                result.seconds < 300.0;
  std::ostringstream detail;
  detail << "max ratio " << worst << " (bound " << bound << "), large-lambda max "
         << worst_large_lambda << ", " << result.seconds << " s";
  result.detail = detail.str();
  return result;
}

CheckResult check_identity() {
  CheckResult result{"flux-pressure identity along the decoupled iteration (N = 4)"};
  const auto t0 = Clock::now();
  const BlockSystem sys =
      assemble_system(make_mesh(4), make_biot_manufactured(1.0, 100.0, 10.0), {});
  SolverWorkspace workspace(sys);
  SolverConfig config;
  config.homogeneous = true;
  const Vec zero = Vec::Zero(sys.total_size());
  auto [x, report] = uzawa_solve(workspace, config, &zero);
  double worst = 0.0;
  for (double r : report.identity_residuals) worst = std::max(worst, r);
  g_mass.record(mass_residual(sys, workspace.monolithic_solve()));
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = report.converged && !report.identity_residuals.empty() && worst <= 1e-10;
  std::ostringstream detail;
  detail << "max relative identity residual " << worst << " over " << report.identity_residuals.size()
         << " iterations";
  result.detail = detail.str();
  return result;
}

CheckResult check_splitting_equivalence() {
  CheckResult result{"ten decoupled sweeps equal preconditioned Richardson (N = 2)"};
  const auto t0 = Clock::now();
  const BlockSystem sys = assemble_system(make_mesh(2), make_biot_manufactured(1.0, 1.0, 1.0), {});
  SolverWorkspace workspace(sys);
  SolverConfig config;
  config.max_iterations = 10;
  config.tol_factor = 1e30;
  config.seed = 2023;
  double worst = 0.0;
  Vec y = workspace.random_start(config.seed);
  Vec x = y;
  // Compare iterate by iterate.
  for (int k = 1; k <= 10; ++k) {
    SolverConfig step = config;
    step.max_iterations = 1;
    step.initial_guess = x;
    x = uzawa_solve(workspace, step).first;
    y = richardson_gs_step(workspace, y);
    worst = std::max(worst, (x - y).norm() / (1.0 + y.norm()));
  }
  g_mass.record(mass_residual(sys, workspace.monolithic_solve()));
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = worst <= 1e-12;
  std::ostringstream detail;
  detail << "max relative deviation " << worst;
  result.detail = detail.str();
  return result;
}

CheckResult check_parameter_robustness() {
  CheckResult result{"iteration counts stay flat across the parameter grid and mesh levels"};
  const auto t0 = Clock::now();
  const auto grid = biot_grid();
  const std::vector<int> levels{32, 64};
  std::vector<int> counts(grid.size() * levels.size(), -1);
  std::vector<double> mass(grid.size() * levels.size(), 1.0);
  std::atomic<bool> failed{false};
  parallel_for(static_cast<int>(grid.size() * levels.size()), [&](int idx) {
    try {
      const auto [alpha_p, lambda, r_inv] = grid[idx % grid.size()];
      const int level = levels[idx / grid.size()];
      const BlockSystem sys =
          assemble_system(make_mesh(level), make_biot_manufactured(lambda, r_inv, alpha_p), {});
      SolverWorkspace workspace(sys);
      SolverConfig config;
      auto [x, report] = uzawa_solve(workspace, config);
      if (report.converged) counts[idx] = report.iterations;
      mass[idx] = mass_residual(sys, workspace.monolithic_solve());
    } catch (const std::exception&) {
      failed = true;
    }
  });
  int min_count = 1 << 30, max_count = -1, max_level_gap = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int c32 = counts[i];
    const int c64 = counts[grid.size() + i];
    if (c32 < 0 || c64 < 0) {
      failed = true;
      continue;
    }
    min_count = std::min({min_count, c32, c64});
    max_count = std::max({max_count, c32, c64});
    max_level_gap = std::max(max_level_gap, std::abs(c32 - c64));
  }
  for (double m : mass) g_mass.record(m);
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = !failed && max_count <= 3 * min_count && max_level_gap <= 3 &&
                result.seconds < 900.0;
  std::ostringstream detail;
  detail << "counts in [" << min_count << ", " << max_count << "], max level gap " << max_level_gap
         << ", " << result.seconds << " s";
  result.detail = detail.str();
  return result;
}

CheckResult check_fixed_stress_validity() {
  CheckResult result{"fixed stress converges and all schemes agree on the reference problems"};
  const auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream detail;
  for (const bool four : {false, true}) {
    for (int level : {16, 32}) {
      const ProblemSpec spec = four ? make_four_network() : make_barenblatt();
      const BlockSystem sys = assemble_system(make_mesh(level), spec, {});
      SolverWorkspace workspace(sys);
      const Vec reference = workspace.monolithic_solve();
      const double scale = workspace.solution_norm(reference);
      g_mass.record(mass_residual(sys, reference));

      SolverConfig config;
      config.max_iterations = 100;
      auto [xf, rf] = fixed_stress_solve(workspace, config, sys.stab.L_fixed_stress);
      config.max_iterations = 500;
      auto [xu, ru] = uzawa_solve(workspace, config);
      auto [xg, rg] = gmres_outer_solve(workspace, config);
      const bool all_converged = rf.converged && ru.converged && rg.converged;
      double worst_pair = 0.0;
      const std::vector<const Vec*> solutions{&xf, &xu, &xg};
      for (std::size_t a = 0; a < solutions.size(); ++a)
        for (std::size_t b = a + 1; b < solutions.size(); ++b)
          worst_pair = std::max(
              worst_pair, workspace.solution_norm(Vec(*solutions[a] - *solutions[b])) / scale);
      pass = pass && all_converged && worst_pair <= 1e-5;
      detail << (four ? "four-network" : "barenblatt") << " N=" << level << ": fs "
             << rf.iterations << " it, agreement " << worst_pair << "; ";
    }
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = pass;
  result.detail = detail.str();
  return result;
}

CheckResult check_mass_conservation() {
  CheckResult result{"conservation-equation residual at the direct solutions"};
  result.pass = g_mass.count > 0 && g_mass.worst <= 1e-10;
  std::ostringstream detail;
  detail << "max elementwise residual " << g_mass.worst << " over " << g_mass.count
         << " configurations";
  result.detail = detail.str();
  return result;
}

// Polynomial data with a known exact solution: p = a(x) + a(y),
// v = -(a'(x), a'(y)), u = curl(a(x) a(y)) with a(t) = t^2 (1-t)^2 and unit
// coefficients.
ProblemSpec polynomial_case() {
  ProblemSpec spec;
  spec.name = "polynomial";
  spec.networks = 1;
  spec.scaled_direct = direct_scaled(1, 1.0, {1.0}, {1.0}, Eigen::MatrixXd::Zero(1, 1));
  for (SegmentBC& seg : spec.bc) {
    seg.displacement_clamped = true;
    seg.flux_sealed = true;
  }
  auto a = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto da = [](double t) { return 2.0 * t - 6.0 * t * t + 4.0 * t * t * t; };
  auto d2a = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  auto d3a = [](double t) { return -12.0 + 24.0 * t; };
  spec.g.push_back([=](const Vec2& x) {
    return (d2a(x.x()) + d2a(x.y())) - (a(x.x()) + a(x.y()));
  });
  spec.f = [=](const Vec2& x) {
    const double f1 = -0.5 * (d2a(x.x()) * da(x.y()) + a(x.x()) * d3a(x.y())) + da(x.x());
    const double f2 = 0.5 * (d3a(x.x()) * a(x.y()) + da(x.x()) * d2a(x.y())) + da(x.y());
    return Vec2(f1, f2);
  };
  return spec;
}

CheckResult check_discretization_order() {
  CheckResult result{"first-order flux convergence on polynomial data"};
  const auto t0 = Clock::now();
  auto da = [](double t) { return 2.0 * t - 6.0 * t * t + 4.0 * t * t * t; };
  const QuadratureRule& rule = triangle_rule_high_order();
  std::vector<double> errors;
  for (int level : {8, 16, 32}) {
    auto mesh = make_mesh(level);
    const BlockSystem sys = assemble_system(mesh, polynomial_case(), {});
    SolverWorkspace workspace(sys);
    const Vec x = workspace.monolithic_solve();
    const Vec v = sys.v_part(x);
    double err2 = 0.0;
    for (int c = 0; c < mesh->cell_count(); ++c) {
      const auto& cv = mesh->cells[c];
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 p = rule.points[q][0] * mesh->vertices[cv[0]] +
                       rule.points[q][1] * mesh->vertices[cv[1]] +
                       rule.points[q][2] * mesh->vertices[cv[2]];
        Vec2 vh = Vec2::Zero();
        for (int s = 0; s < 3; ++s) {
          const int g = sys.flux_index_of_edge[sys.rt_map.dof(c, s)];
          if (g < 0) continue;
          vh += v[g] * sys.rt_table.value(c, s, p - mesh->centroid(c));
        }
        const Vec2 exact(-da(p.x()), -da(p.y()));
        err2 += 2.0 * mesh->cell_area[c] * rule.weights[q] * (vh - exact).squaredNorm();
      }
    }
    errors.push_back(std::sqrt(err2));
  }
  const double order1 = std::log2(errors[0] / errors[1]);
  const double order2 = std::log2(errors[1] / errors[2]);
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = order1 >= 0.9 && order2 >= 0.9;
  std::ostringstream detail;
  detail << "errors " << errors[0] << " " << errors[1] << " " << errors[2] << ", orders " << order1
         << " " << order2;
  result.detail = detail.str();
  return result;
}

CheckResult check_timing() {
  CheckResult result{"decoupled scheme no slower than fixed stress (four-network, N = 64)"};
  result.gating = false;
  const auto t0 = Clock::now();
  const BlockSystem sys = assemble_system(make_mesh(64), make_four_network(), {});
  SolverWorkspace workspace(sys);
  SolverConfig config;
  auto [xu, ru] = uzawa_solve(workspace, config);
  config.max_iterations = 200;
  auto [xf, rf] = fixed_stress_solve(workspace, config, sys.stab.L_fixed_stress);
  const double uzawa_total = workspace.setup_seconds() + ru.solve_seconds;
  const double fs_total = workspace.setup_seconds() + rf.solve_seconds;
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  result.pass = ru.converged && rf.converged && uzawa_total <= fs_total;
  std::ostringstream detail;
  detail << "uzawa " << uzawa_total << " s (" << ru.iterations << " it), fixed-stress " << fs_total
         << " s (" << rf.iterations << " it)";
  result.detail = detail.str();
  return result;
}

}  // namespace

int main() {
  std::vector<CheckResult> results;
  results.push_back(check_sherman_morrison());
  results.push_back(check_scaling_counts());
  results.push_back(check_contraction_bound());
  results.push_back(check_identity());
  results.push_back(check_splitting_equivalence());
  results.push_back(check_parameter_robustness());
  results.push_back(check_fixed_stress_validity());
  results.push_back(check_mass_conservation());
  results.push_back(check_discretization_order());
  results.push_back(check_timing());

  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CheckResult& r = results[i];
    if (!r.pass && r.gating) ++failures;
    std::printf("[%s] %zu. %s%s\n    %s\n", r.pass ? "PASS" : (r.gating ? "FAIL" : "INFO-FAIL"),
                i + 1, r.name.c_str(), r.gating ? "" : " (informational)", r.detail.c_str());
  }
  std::printf("%d gating failure(s)\n", failures);
  return failures;
}
