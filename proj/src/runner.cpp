#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace mpet {

namespace {

std::string format_value(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

std::string fraction(int subdivisions) { return "1/" + std::to_string(subdivisions); }

}  // namespace

std::vector<std::string> suite_names() { return {"biot", "barenblatt", "four_network", "scaling"}; }

ExperimentSuite make_suite(const std::string& name, const RunOptions& options) {
  ExperimentSuite suite;
  suite.name = name;
  if (name == "biot") {
    const std::vector<double> alpha_ps = {1e-8, 1e-6, 1e-4, 1e-2, 1.0};
    const std::vector<double> lambdas = {1.0, 1e2, 1e4, 1e6};
    const std::vector<double> r_invs = {1e-8, 1e-4, 1.0, 1e4, 1e8};
    for (double alpha_p : alpha_ps)
      for (double lambda : lambdas)
        for (double r_inv : r_invs) {
          GridPoint point;
          point.description = "alpha_p=" + format_value(alpha_p) + ";lambda=" + format_value(lambda) +
                              ";Rinv=" + format_value(r_inv);
          point.make = [lambda, r_inv, alpha_p] {
            return make_biot_manufactured(lambda, r_inv, alpha_p);
          };
          suite.points.push_back(std::move(point));
        }
    suite.default_levels = {16, 32, 64};
  } else if (name == "barenblatt" || name == "four_network") {
    const std::vector<double> k_scales = {1e-2, 1.0, 1e2, 1e4, 1e10};
    const std::vector<double> lambda_scales = {1e-2, 1.0, 1e2};
    const double tau = options.tau;
    for (double ks : k_scales)
      for (double ls : lambda_scales) {
        GridPoint point;
        point.description = "k_scale=" + format_value(ks) + ";lambda_scale=" + format_value(ls);
        if (name == "barenblatt")
          point.make = [ks, ls, tau] { return make_barenblatt(ks, ls, tau); };
        else
          point.make = [ks, ls, tau] { return make_four_network(ks, ls, tau); };
        suite.points.push_back(std::move(point));
      }
    suite.default_levels = {16, 32, 64};
  } else if (name == "scaling") {
    for (int n : {1, 2, 4, 8}) {
      GridPoint point;
      point.description = "networks=" + std::to_string(n);
      point.make = [n] { return make_scaling(n); };
      suite.points.push_back(std::move(point));
    }
    suite.default_levels = {32};
  } else {
    throw std::invalid_argument("make_suite: unknown suite '" + name + "'");
  }
  if (options.include_h128 && name == "biot") suite.default_levels.push_back(128);
  return suite;
}

std::vector<RunRecord> run_suite(const ExperimentSuite& suite, const RunOptions& options) {
  const std::vector<int> levels = options.mesh_levels.empty() ? suite.default_levels : options.mesh_levels;
  if (suite.points.empty() || levels.empty()) throw std::invalid_argument("run_suite: empty grid");

  AssemblyOptions assembly_options;
  assembly_options.eta = options.eta;
  elasticity_spd_check(suite.points.front().make(), assembly_options);

  struct Task {
    int point;
    int level;
  };
  std::vector<Task> tasks;
  for (int level : levels)
    for (std::size_t p = 0; p < suite.points.size(); ++p)
      tasks.push_back({static_cast<int>(p), level});

  const int per_task = static_cast<int>(options.schemes.size());
  std::vector<RunRecord> records(tasks.size() * per_task);

  auto run_task = [&](const Task& task) {
    using Clock = std::chrono::steady_clock;
    const GridPoint& point = suite.points[task.point];
    std::vector<RunRecord> rows(per_task);
    for (int s = 0; s < per_task; ++s) {
      rows[s].suite = suite.name;
      rows[s].scheme = scheme_name(options.schemes[s]);
      rows[s].subdivisions = task.level;
      rows[s].param_point = point.description;
      rows[s].converged = false;
      rows[s].iterations = -1;
    }
    try {
      const auto t0 = Clock::now();
      const ProblemSpec spec = point.make();
      auto mesh = std::make_shared<Mesh>(build_structured_mesh(task.level));
      const BlockSystem sys = assemble_system(mesh, spec, assembly_options);
      SolverWorkspace workspace(sys);
      const double setup = std::chrono::duration<double>(Clock::now() - t0).count();

      if (!options.export_dir.empty()) {
        std::ostringstream dir;
        dir << options.export_dir << "/" << suite.name << "_p" << task.point << "_N" << task.level;
        export_blocks(sys, dir.str());
      }

      Vec reference;
      if (options.diagnostics) reference = workspace.monolithic_solve();

      SolverConfig config;
      config.tol_factor = options.tol_factor;
      config.max_iterations = options.max_iterations;
      config.seed = options.seed;
      for (int s = 0; s < per_task; ++s) {
        RunRecord& row = rows[s];
        row.networks = sys.networks;
        row.lambda = sys.scaled.lambda;
        try {
          auto [solution, report] =
              run_scheme(workspace, options.schemes[s], config, options.diagnostics ? &reference : nullptr);
          row.iterations = report.iterations;
          row.converged = report.converged;
          row.residual_ratio = report.residual_ratio();
          row.max_contraction = report.max_contraction();
          row.elapsed_s = setup + report.solve_seconds;
        } catch (const std::exception&) {
          row.converged = false;
        }
      }
    } catch (const std::exception&) {
      // leave the failure rows in place
    }
    return rows;
  };

  int n_threads = options.threads > 0 ? options.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      auto rows = run_task(tasks[t]);
      for (int s = 0; s < per_task; ++s) records[t * per_task + s] = std::move(rows[s]);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

std::string csv_header() {
  return "suite,scheme,n,h,lambda,param_point,iterations,converged,residual_ratio,max_contraction,"
         "elapsed_s";
}

std::string csv_row(const RunRecord& r) {
  std::ostringstream out;
  out << r.suite << "," << r.scheme << "," << r.networks << "," << fraction(r.subdivisions) << ",";
  out.precision(12);
  out << r.lambda << "," << r.param_point << "," << r.iterations << ","
      << (r.converged ? "true" : "false") << ",";
  out.precision(6);
  out << std::scientific << r.residual_ratio << ",";
  if (std::isnan(r.max_contraction))
    out << "nan";
  else
    out << r.max_contraction;
  out << "," << std::fixed << r.elapsed_s;
  return out.str();
}

void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << csv_header() << "\n";
  for (const RunRecord& r : records) out << csv_row(r) << "\n";
}

void emit_plot_script(const std::string& csv_path) {
  const std::string script_path = csv_path + ".plot.py";
  std::ofstream out(script_path);
  if (!out) throw std::runtime_error("emit_plot_script: cannot open " + script_path);
  out << R"(#!/usr/bin/env python3
"""Plots iteration counts from a results CSV produced by the mpet CLI."""
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else )"
      << '"' << std::filesystem::path(csv_path).filename().string() << '"' << R"(
rows = list(csv.DictReader(open(path)))
series = defaultdict(list)
labels = []
for r in rows:
    if r["converged"] != "true":
        continue
    key = (r["scheme"], r["h"])
    if r["param_point"] not in labels:
        labels.append(r["param_point"])
    series[key].append((labels.index(r["param_point"]), int(r["iterations"])))

fig, ax = plt.subplots(figsize=(11, 5))
markers = {"uzawa": "x", "fixed-stress": "o", "gmres": "."}
styles = {"1/16": "-.", "1/32": "--", "1/64": "-"}
for (scheme, h), pts in sorted(series.items()):
    pts.sort()
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    ax.plot(xs, ys, marker=markers.get(scheme, "+"), linestyle=styles.get(h, ":"),
            label=f"{scheme} h={h}")
ax.set_xticks(range(len(labels)))
ax.set_xticklabels(labels, rotation=90, fontsize=5)
ax.set_ylabel("iterations to the prescribed residual reduction")
ax.legend(fontsize=7)
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print("wrote", out)
)";
}

}  // namespace mpet
