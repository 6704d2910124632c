#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpet.h"
#include "runner.hpp"

using namespace mpet;

TEST_CASE("manufactured single-network data") {
  SUBCASE("pressure profile value at the center") {
    // phi2(0.5, 0.5) = 900/256; with unit storage weight g picks up 1 - phi2 there.
    const ProblemSpec spec = make_biot_manufactured(1.0, 1.0, 1.0);
    const double center = spec.g[0](Vec2(0.5, 0.5));
    CHECK(center == doctest::Approx(-(900.0 / 256.0 - 1.0)).epsilon(1e-15));
  }
  SUBCASE("momentum load vanishes at the corners") {
    const ProblemSpec spec = make_biot_manufactured(7.0, 2.0, 0.3);
    for (double x : {0.0, 1.0})
      for (double y : {0.0, 1.0}) CHECK(spec.f(Vec2(x, y)).norm() <= 1e-18);
  }
  SUBCASE("source at the corners reduces to the storage term") {
    const ProblemSpec spec = make_biot_manufactured(1.0, 4.0, 0.7);
    for (double x : {0.0, 1.0})
      for (double y : {0.0, 1.0}) CHECK(spec.g[0](Vec2(x, y)) == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("vanishing storage and conductivity limit") {
    const ProblemSpec spec = make_biot_manufactured(1.0, 1e300, 0.0);
    for (double t : {0.1, 0.3, 0.7}) CHECK(std::abs(spec.g[0](Vec2(t, 1.0 - t))) <= 1e-290);
  }
}

TEST_CASE("reference parameter tables") {
  const RawModelParams barenblatt = barenblatt_params();
  CHECK(barenblatt.K[0] == 6.18e-12);
  CHECK(barenblatt.K[1] == 2.72e-11);
  CHECK(barenblatt.alpha[0] == 0.95);
  CHECK(barenblatt.alpha[1] == 0.12);
  CHECK(barenblatt.lambda == 4.2e6);
  CHECK_THROWS_AS(barenblatt_params(3.3e-7), std::invalid_argument);

  const RawModelParams four = four_network_params();
  CHECK(four.lambda == 505.0);
  CHECK(four.beta(2, 3) == 1.0e-13);
  CHECK(four.beta(0, 1) == 1.5e-19);
  CHECK(four.K[2] == 1.57e-9);

  const ProblemSpec spec = make_barenblatt();
  CHECK(spec.g.empty());
  CHECK(!spec.f);
  CHECK(spec.bc[static_cast<int>(BoundaryLabel::top)].traction.y() == -1.0);
  CHECK(spec.bc[static_cast<int>(BoundaryLabel::left)].displacement_clamped);
}

TEST_CASE("scaling configuration") {
  const ProblemSpec spec = make_scaling(4);
  const ScaledParams s = spec.scale();
  CHECK(s.alpha_cross.isZero(0.0));
  CHECK(s.lambda == 1.0e3);
  for (int i = 0; i < 4; ++i) {
    CHECK(s.R_inv[i] == 1.0e4);
    CHECK(s.alpha_p[i] == 1.0e-4);
    CHECK(spec.bc[0].pressure_value[i] == 10.0);
  }
  const ProblemSpec biot_like = make_scaling(1);
  CHECK(biot_like.scale().R_inv[0] == 1.0e4);
  CHECK_THROWS_AS(make_scaling(0), std::invalid_argument);
}

TEST_CASE("parameter files round trip") {
  const std::string path = "params_roundtrip.txt";
  const RawModelParams params = four_network_params();
  write_params_file(params, path);
  const RawModelParams back = read_params_file(path);
  CHECK(back.networks == params.networks);
  CHECK(back.lambda == params.lambda);
  CHECK(back.mu == params.mu);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.c_p[i] == params.c_p[i]);
    CHECK(back.alpha[i] == params.alpha[i]);
    CHECK(back.K[i] == params.K[i]);
  }
  CHECK((back.beta - params.beta).norm() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("suite construction") {
  RunOptions options;
  const ExperimentSuite biot = make_suite("biot", options);
  CHECK(biot.points.size() == 100);
  CHECK(biot.default_levels == std::vector<int>{16, 32, 64});
  const ExperimentSuite scaling = make_suite("scaling", options);
  CHECK(scaling.points.size() == 4);
  const ExperimentSuite barenblatt = make_suite("barenblatt", options);
  CHECK(barenblatt.points.size() == 15);
  CHECK_THROWS_AS(make_suite("unknown", options), std::invalid_argument);
  options.include_h128 = true;
  CHECK(make_suite("biot", options).default_levels.back() == 128);
}

TEST_CASE("suite runs produce deterministic tables") {
  RunOptions options;
  options.mesh_levels = {4};
  options.schemes = {Scheme::uzawa, Scheme::gmres};
  options.threads = 2;
  options.diagnostics = true;
  const ExperimentSuite suite = make_suite("scaling", options);
  const auto records1 = run_suite(suite, options);
  const auto records2 = run_suite(suite, options);
  REQUIRE(records1.size() == 8);  // 4 grid points x 2 schemes
  auto strip_elapsed = [](const RunRecord& r) {
    std::string row = csv_row(r);
    return row.substr(0, row.rfind(','));
  };
  for (std::size_t i = 0; i < records1.size(); ++i) {
    CHECK(records1[i].converged);
    CHECK(strip_elapsed(records1[i]) == strip_elapsed(records2[i]));
  }

  const std::string csv = "suite_test.csv";
  write_csv(records1, csv);
  emit_plot_script(csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "suite,scheme,n,h,lambda,param_point,iterations,converged,residual_ratio,max_contraction,"
        "elapsed_s");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);
  CHECK(std::filesystem::exists(csv + ".plot.py"));
  std::filesystem::remove(csv + ".plot.py");
  std::remove(csv.c_str());
}

TEST_CASE("c interface") {
  mpet_run_options options;
  mpet_run_options_init(&options);
  options.subdivisions = 4;

  SUBCASE("single problem lifecycle") {
    mpet_problem* problem = nullptr;
    REQUIRE(mpet_problem_create("scaling", 2, 8, &options, &problem) == MPET_OK);
    int flux = 0, pressure = 0, displacement = 0;
    CHECK(mpet_problem_dof_counts(problem, &flux, &pressure, &displacement) == MPET_OK);
    CHECK(pressure == 2 * 2 * 8 * 8);

    mpet_solution* solution = nullptr;
    REQUIRE(mpet_problem_solve(problem, "uzawa", &solution) == MPET_OK);
    int iterations = 0, converged = 0;
    double ratio = 1.0, mass = 1.0;
    CHECK(mpet_solution_iterations(solution, &iterations) == MPET_OK);
    CHECK(mpet_solution_converged(solution, &converged) == MPET_OK);
    CHECK(mpet_solution_residual_ratio(solution, &ratio) == MPET_OK);
    CHECK(mpet_solution_mass_residual(solution, &mass) == MPET_OK);
    CHECK(converged == 1);
    CHECK(iterations >= 1);
    CHECK(ratio <= 1e-8);
    mpet_solution_free(solution);

    const std::string mesh_path = "capi_mesh.txt";
    CHECK(mpet_problem_dump_mesh(problem, mesh_path.c_str()) == MPET_OK);
    CHECK(std::filesystem::exists(mesh_path));
    std::remove(mesh_path.c_str());
    mpet_problem_free(problem);
  }
  SUBCASE("invalid input is reported") {
    mpet_problem* problem = nullptr;
    CHECK(mpet_problem_create("nonsense", 1, 8, &options, &problem) == MPET_ERR_INVALID_ARGUMENT);
    CHECK(std::string(mpet_last_error()).find("nonsense") != std::string::npos);
    CHECK(std::string(mpet_status_name(MPET_ERR_SINGULAR_MATRIX)) == "singular matrix");
  }
  SUBCASE("suite runner writes the table") {
    mpet_run_options small = options;
    small.subdivisions = 4;
    small.schemes = "uzawa";
    small.emit_plot_script = 0;
    const std::string csv = "capi_suite.csv";
    REQUIRE(mpet_run_suite("scaling", &small, csv.c_str()) == MPET_OK);
    std::ifstream in(csv);
    int rows = -1;  // header
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 4);
    std::remove(csv.c_str());
  }
}
