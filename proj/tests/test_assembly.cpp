#include <doctest.h>

#include <filesystem>
#include <random>

#include <Eigen/Eigenvalues>

#include "assembly.hpp"
#include "quadrature.hpp"

using namespace mpet;

namespace {

std::shared_ptr<const Mesh> make_mesh(int n) {
  return std::make_shared<const Mesh>(build_structured_mesh(n));
}

std::vector<int> identity_map(int n) {
  std::vector<int> map(n);
  for (int i = 0; i < n; ++i) map[i] = i;
  return map;
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m.eigen()); }

}  // namespace

TEST_CASE("flux mass block") {
  auto mesh = make_mesh(2);
  const ShapeTable table = build_shape_table(*mesh, SpaceKind::RT0);
  const DofMap map = build_dofmap(*mesh, SpaceKind::RT0);
  const auto index = identity_map(map.dof_count);

  SUBCASE("scaling a network weight scales its block") {
    const auto a1 = assemble_flux_mass(*mesh, table, map, index, map.dof_count, {3.0});
    const auto a2 = assemble_flux_mass(*mesh, table, map, index, map.dof_count, {6.0});
    CHECK((dense(a2) - 2.0 * dense(a1)).norm() <= 1e-13 * dense(a1).norm());
  }
  SUBCASE("entries match an independent high-order quadrature") {
    const auto mass = assemble_mass_single(*mesh, table, map, index, map.dof_count);
    const QuadratureRule& oracle = triangle_rule_high_order();
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(map.dof_count, map.dof_count);
    for (int c = 0; c < mesh->cell_count(); ++c) {
      const auto& cv = mesh->cells[c];
      for (std::size_t q = 0; q < oracle.points.size(); ++q) {
        const Vec2 x = oracle.points[q][0] * mesh->vertices[cv[0]] +
                       oracle.points[q][1] * mesh->vertices[cv[1]] +
                       oracle.points[q][2] * mesh->vertices[cv[2]];
        const double w = 2.0 * mesh->cell_area[c] * oracle.weights[q];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            expected(map.dof(c, a), map.dof(c, b)) +=
                w * table.value(c, a, x - mesh->centroid(c))
                        .dot(table.value(c, b, x - mesh->centroid(c)));
      }
    }
    CHECK((dense(mass) - expected).norm() <= 1e-13 * expected.norm());
  }
  SUBCASE("positive weights give an SPD block") {
    const auto block =
        assemble_flux_mass(*mesh, table, map, index, map.dof_count, {2.0, 0.5, 1e-3});
    CHECK_NOTHROW(factorize(block, true, "A_v"));
    CHECK(block.rows() == 3 * map.dof_count);
  }
  SUBCASE("nonpositive weight rejected") {
    CHECK_THROWS_AS(assemble_flux_mass(*mesh, table, map, index, map.dof_count, {0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("divergence pairing") {
  auto mesh = make_mesh(3);
  const ShapeTable table = build_shape_table(*mesh, SpaceKind::RT0);
  const DofMap map = build_dofmap(*mesh, SpaceKind::RT0);
  const auto index = identity_map(map.dof_count);
  const auto b = assemble_div(*mesh, table, map, index, map.dof_count);

  SUBCASE("entries are signed edge lengths") {
    const Eigen::MatrixXd bd = dense(b);
    for (int c = 0; c < mesh->cell_count(); ++c)
      for (int k = 0; k < 3; ++k) {
        const int e = mesh->cell_edges[c][k];
        const double expected = -mesh->cell_edge_outward[c][k] * mesh->edges[e].length;
        CHECK(bd(c, e) == doctest::Approx(expected).epsilon(1e-12));
      }
  }
  SUBCASE("zero coefficients map to zero") {
    CHECK(b.apply(Vec::Zero(map.dof_count)).norm() == 0.0);
  }
  SUBCASE("a field with unit divergence pairs with the cell areas") {
    // v = (x, y)/2 lies in the lowest-order flux space and has div v = 1.
    Vec coeff(map.dof_count);
    for (int e = 0; e < mesh->edge_count(); ++e) {
      const Vec2 mid = mesh->edge_point(e, 0.5);
      coeff[e] = 0.5 * mid.dot(mesh->edges[e].normal);
    }
    const Vec image = b.apply(coeff);
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(image[c] == doctest::Approx(-mesh->cell_area[c]).epsilon(1e-12));
  }
}

TEST_CASE("elasticity block") {
  auto mesh = make_mesh(2);
  const ShapeTable table = build_shape_table(*mesh, SpaceKind::BDM1);
  const DofMap map = build_dofmap(*mesh, SpaceKind::BDM1);
  const auto index = identity_map(map.dof_count);

  SUBCASE("penalty weight must be positive") {
    std::vector<char> dg(mesh->edge_count(), 1);
    CHECK_THROWS_AS(
        assemble_elasticity(*mesh, table, map, 0.0, 1.0, dg, index, map.dof_count),
        std::invalid_argument);
  }

  std::vector<char> interior_only(mesh->edge_count(), 0);
  for (int e = 0; e < mesh->edge_count(); ++e) interior_only[e] = !mesh->is_boundary_edge(e);
  const auto a_interior =
      assemble_elasticity(*mesh, table, map, 10.0, 0.0, interior_only, index, map.dof_count);

  SUBCASE("symmetric") {
    const Eigen::MatrixXd ad = dense(a_interior);
    CHECK((ad - ad.transpose()).norm() <= 1e-13 * ad.norm());
  }
  SUBCASE("rigid motions span the kernel before boundary conditions") {
    auto interpolate = [&](auto field) {
      Vec coeff(map.dof_count);
      for (int e = 0; e < mesh->edge_count(); ++e) {
        coeff[2 * e] = field(mesh->vertices[mesh->edges[e].a]).dot(mesh->edges[e].normal);
        coeff[2 * e + 1] = field(mesh->vertices[mesh->edges[e].b]).dot(mesh->edges[e].normal);
      }
      return coeff;
    };
    const Vec tx = interpolate([](const Vec2&) { return Vec2(1.0, 0.0); });
    const Vec ty = interpolate([](const Vec2&) { return Vec2(0.0, 1.0); });
    const Vec rot = interpolate([](const Vec2& x) { return Vec2(-x.y(), x.x()); });
    const double scale = dense(a_interior).norm();
    CHECK(tx.dot(a_interior.apply(tx)) <= 1e-12 * scale);
    CHECK(ty.dot(a_interior.apply(ty)) <= 1e-12 * scale);
    CHECK(rot.dot(a_interior.apply(rot)) <= 1e-12 * scale);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(dense(a_interior));
    int near_zero = 0;
    for (int i = 0; i < eigs.eigenvalues().size(); ++i)
      if (eigs.eigenvalues()[i] <= 1e-10 * eigs.eigenvalues().maxCoeff()) ++near_zero;
    CHECK(near_zero == 3);
  }
  SUBCASE("clamped block is positive definite") {
    const ProblemSpec spec = make_biot_manufactured(1.0, 1.0, 1.0);
    const BlockSystem sys = assemble_system(mesh, spec, {});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(dense(sys.A_u));
    CHECK(eigs.eigenvalues()[0] > 0.0);
    const Eigen::MatrixXd ad = dense(sys.A_u);
    CHECK((ad - ad.transpose()).norm() <= 1e-13 * ad.norm());
  }
}

TEST_CASE("pressure blocks") {
  auto mesh = make_mesh(4);
  const double h = mesh->h;

  SUBCASE("mass diagonal holds the cell areas") {
    const ProblemSpec spec = make_biot_manufactured(1.0, 1.0, 0.5);
    const BlockSystem sys = assemble_system(mesh, spec, {});
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(sys.cell_area[c] == doctest::Approx(h * h / 2.0).epsilon(1e-13));
    // Single network without transfer: S collapses to a scalar multiple of the mass.
    const double expected =
        sys.scaled.alpha_p[0] + sys.stab.L1 * sys.scaled.R + sys.stab.L2 / sys.scaled.lambda0;
    const Eigen::MatrixXd sd = dense(sys.S_mat);
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(sd(c, c) == doctest::Approx(expected * sys.cell_area[c]).epsilon(1e-13));
  }
  SUBCASE("kronecker structure against a unit pressure column") {
    const ProblemSpec spec = make_scaling(4);
    const BlockSystem sys = assemble_system(mesh, spec, {});
    const int nc = sys.pressure_per_net;
    std::mt19937_64 gen(5);
    const int cell = static_cast<int>(gen() % nc);
    const int net = 2;
    Vec probe = Vec::Zero(sys.pressure_size());
    probe[net * nc + cell] = 1.0;
    const Vec image = sys.S_mat.apply(probe);
    for (int i = 0; i < sys.networks; ++i)
      for (int c = 0; c < nc; ++c) {
        const double expected = c == cell ? sys.S_coeff(i, net) * sys.cell_area[cell] : 0.0;
        CHECK(image[i * nc + c] == doctest::Approx(expected).epsilon(1e-13));
      }
  }
  SUBCASE("per-cell solve agrees with the rank-one inverse sum") {
    // No storage or transfer: S_coeff = L1 R I + (L2/lambda0) ee^T.
    ProblemSpec spec = make_scaling(3);
    spec.scaled_direct = direct_scaled(3, 2.0, {10.0, 10.0, 10.0}, {0.0, 0.0, 0.0},
                                       Eigen::MatrixXd::Zero(3, 3));
    const BlockSystem sys = assemble_system(mesh, spec, {});
    const double a = sys.stab.L1 * sys.scaled.R;
    const double b = sys.stab.L2 / sys.scaled.lambda0;
    CHECK(sys.S_coeff_inv.sum() == doctest::Approx(sherman_morrison_sum(a, b, 3)).epsilon(1e-12));
  }
}

TEST_CASE("boundary conditions") {
  auto mesh = make_mesh(4);
  const int N = mesh->subdivisions;

  SUBCASE("sealed and clamped sides eliminate their dofs") {
    const ProblemSpec spec = make_biot_manufactured(1.0, 1.0, 1.0);
    const BlockSystem sys = assemble_system(mesh, spec, {});
    CHECK(sys.flux_per_net == mesh->edge_count() - 4 * N);
    CHECK(sys.disp_dofs == 2 * (mesh->edge_count() - 4 * N));
    CHECK(sys.rhs_v.norm() == 0.0);
    CHECK(sys.rhs_f.norm() > 0.0);  // volume load
  }
  SUBCASE("prescribed boundary pressures land in the flux equation") {
    const ProblemSpec spec = make_barenblatt();
    const BlockSystem sys = assemble_system(mesh, spec, {});
    CHECK(sys.flux_per_net == mesh->edge_count());
    const ScaledParams& s = sys.scaled;
    int boundary_edge = -1;
    for (int e = 0; e < mesh->edge_count(); ++e)
      if (mesh->is_boundary_edge(e)) boundary_edge = e;
    REQUIRE(boundary_edge >= 0);
    const double expected =
        -s.alpha_raw[1] * 20.0 / s.two_mu * mesh->edges[boundary_edge].length;
    CHECK(sys.rhs_v[sys.flux_per_net + sys.flux_index_of_edge[boundary_edge]] ==
          doctest::Approx(expected).epsilon(1e-13));
    // Interior flux rows carry no boundary data.
    for (int e = 0; e < mesh->edge_count(); ++e)
      if (!mesh->is_boundary_edge(e)) CHECK(sys.rhs_v[sys.flux_index_of_edge[e]] == 0.0);
  }
  SUBCASE("four-network boundary pressures enter every network") {
    const ProblemSpec spec = make_four_network();
    const BlockSystem sys = assemble_system(mesh, spec, {});
    int boundary_edge = 0;
    while (!mesh->is_boundary_edge(boundary_edge)) ++boundary_edge;
    const int g = sys.flux_index_of_edge[boundary_edge];
    const double len = mesh->edges[boundary_edge].length;
    const std::vector<double> pressures{2.0, 20.0, 30.0, 40.0};
    for (int i = 0; i < 4; ++i) {
      const double expected = -sys.scaled.alpha_raw[i] * pressures[i] / sys.scaled.two_mu * len;
      CHECK(sys.rhs_v[i * sys.flux_per_net + g] == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(sys.rhs_g.norm() == 0.0);
  }
  SUBCASE("over-constrained sides are rejected") {
    ProblemSpec spec = make_barenblatt();
    spec.bc[0].flux_sealed = true;  // already pressure Dirichlet
    CHECK_THROWS_AS(assemble_system(mesh, spec, {}), std::invalid_argument);
  }
  SUBCASE("sealed network without storage or boundary data is flagged") {
    ProblemSpec spec = make_biot_manufactured(1.0, 1.0, 1.0);
    spec.scaled_direct = direct_scaled(1, 1.0, {1.0}, {0.0}, Eigen::MatrixXd::Zero(1, 1));
    const BlockSystem sys = assemble_system(mesh, spec, {});
    CHECK(sys.pressure_nullspace[0]);
    Vec p = Vec::Ones(sys.pressure_size());
    sys.project_pressure_nullspace(p);
    CHECK(p.norm() <= 1e-14);
  }
}

TEST_CASE("augmented system") {
  auto mesh = make_mesh(3);
  const ProblemSpec spec = make_barenblatt();
  const BlockSystem sys = assemble_system(mesh, spec, {});
  const AugmentedSystem aug = augment(sys);

  SUBCASE("flux-block application against the component blocks") {
    // Aug flux block equals A_v plus the assembled divergence augmentation.
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Vec y(sys.flux_size());
    for (int i = 0; i < y.size(); ++i) y[i] = uniform(gen);
    const Vec lhs = aug.flux_block.apply(y);
    // B_v^T M B_v y computed through the blocks directly:
    const Vec rhs = sys.A_v.apply(y) + sys.B_v.apply_transpose(aug.apply_M(sys.B_v.apply(y)));
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    // Rayleigh quotients of the augmentation part are nonnegative.
    const double rq = y.dot(lhs) - y.dot(sys.A_v.apply(y));
    CHECK(rq >= -1e-12 * std::abs(y.dot(lhs)));
  }
  SUBCASE("solutions of the block system solve the augmented one") {
    // Direct solve through the monolithic matrix, then substitute.
    const int nv = sys.flux_size(), np = sys.pressure_size(), nu = sys.disp_dofs;
    std::vector<Triplet> triplets;
    auto add = [&triplets](const SparseMatrix& m, int ro, int co, double s, bool tr) {
      const auto& a = m.eigen();
      for (int r = 0; r < a.outerSize(); ++r)
        for (SparseMatrix::Storage::InnerIterator it(a, r); it; ++it) {
          if (tr)
            triplets.emplace_back(co + it.col(), ro + it.row(), s * it.value());
          else
            triplets.emplace_back(ro + it.row(), co + it.col(), s * it.value());
        }
    };
    add(sys.A_v, 0, 0, 1.0, false);
    add(sys.B_v, nv, 0, 1.0, false);
    add(sys.B_v, nv, 0, 1.0, true);
    add(sys.C_mat, nv, nv, -1.0, false);
    add(sys.B_u, nv, nv + np, 1.0, false);
    add(sys.B_u, nv, nv + np, 1.0, true);
    add(sys.A_u, nv + np, nv + np, 1.0, false);
    const auto mono = SparseMatrix::from_triplets(nv + np + nu, nv + np + nu, triplets);
    Vec rhs(nv + np + nu);
    rhs << sys.rhs_v, sys.rhs_g, sys.rhs_f;
    const Vec x = factorize(mono, false, "monolithic").solve(rhs);
    const Vec residual = aug.rhs - aug.apply(x);
    CHECK(residual.norm() <= 1e-12 * aug.rhs.norm());
  }
  SUBCASE("zero augmentation hook recovers the unaugmented top row") {
    const AugmentedSystem plain = augment(sys, true);
    const Vec x = random_vector(sys.total_size(), 23);
    const Vec y = plain.apply(x);
    const Vec expected_v =
        sys.A_v.apply(sys.v_part(x)) + sys.B_v.apply_transpose(sys.p_part(x));
    CHECK((sys.v_part(y) - expected_v).norm() <= 1e-13 * expected_v.norm());
    CHECK((sys.v_part(plain.rhs) - sys.rhs_v).norm() == 0.0);
  }
}

TEST_CASE("matrix market export") {
  auto mesh = make_mesh(2);
  const ProblemSpec spec = make_scaling(2);
  const BlockSystem sys = assemble_system(mesh, spec, {});
  const std::string dir = "export_test_blocks";
  export_blocks(sys, dir);
  const SparseMatrix a_v = read_matrix_market(dir + "/A_v.mtx");
  CHECK(a_v.rows() == sys.A_v.rows());
  const Vec probe = random_vector(a_v.cols(), 3);
  CHECK((a_v.apply(probe) - sys.A_v.apply(probe)).norm() <= 1e-14 * sys.A_v.apply(probe).norm());
  const Vec rhs_f = read_matrix_market_vector(dir + "/rhs_f.mtx");
  CHECK((rhs_f - sys.rhs_f).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coarse elasticity self-check accepts the default penalty") {
  CHECK_NOTHROW(elasticity_spd_check(make_barenblatt(), {}));
}
