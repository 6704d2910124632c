#include "assembly.hpp"

#include <filesystem>
#include <stdexcept>

#include "quadrature.hpp"

namespace mpet {

bool BlockSystem::has_pressure_nullspace() const {
  for (bool flag : pressure_nullspace)
    if (flag) return true;
  return false;
}

void BlockSystem::project_pressure_nullspace(Eigen::Ref<Vec> p) const {
  if (!has_pressure_nullspace()) return;
  const double total_area = cell_area.sum();
  for (int i = 0; i < networks; ++i) {
    if (!pressure_nullspace[i]) continue;
    auto block = p.segment(i * pressure_per_net, pressure_per_net);
    block.array() -= cell_area.dot(block) / total_area;
  }
}

namespace {

Vec2 physical_point(const Mesh& mesh, int cell, const std::array<double, 3>& bary) {
  const auto& cv = mesh.cells[cell];
  return bary[0] * mesh.vertices[cv[0]] + bary[1] * mesh.vertices[cv[1]] + bary[2] * mesh.vertices[cv[2]];
}

double tensor_dot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace

SparseMatrix assemble_mass_single(const Mesh& mesh, const ShapeTable& table, const DofMap& map,
                                  const std::vector<int>& index_of, int n_free) {
  const QuadratureRule& quad = triangle_rule_degree4();
  std::vector<Triplet> triplets;
  const int nl = table.shapes_per_cell;
  triplets.reserve(static_cast<std::size_t>(mesh.cell_count()) * nl * nl);
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Vec2 xc = mesh.centroid(c);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Vec2 rel = physical_point(mesh, c, quad.points[q]) - xc;
      const double w = 2.0 * mesh.cell_area[c] * quad.weights[q];
      std::vector<Vec2> vals(nl);
      for (int s = 0; s < nl; ++s) vals[s] = table.value(c, s, rel);
      for (int a = 0; a < nl; ++a) {
        const int ga = index_of[map.dof(c, a)];
        if (ga < 0) continue;
        for (int b = 0; b < nl; ++b) {
          const int gb = index_of[map.dof(c, b)];
          if (gb < 0) continue;
          triplets.emplace_back(ga, gb, w * vals[a].dot(vals[b]));
        }
      }
    }
  }
  return SparseMatrix::from_triplets(n_free, n_free, triplets);
}

SparseMatrix assemble_flux_mass(const Mesh& mesh, const ShapeTable& rt_table, const DofMap& rt_map,
                                const std::vector<int>& index_of, int n_free,
                                const std::vector<double>& R_inv) {
  const SparseMatrix mass = assemble_mass_single(mesh, rt_table, rt_map, index_of, n_free);
  const int n = static_cast<int>(R_inv.size());
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * mass.nonzeros());
  const auto& m = mass.eigen();
  for (int i = 0; i < n; ++i) {
    if (R_inv[i] <= 0.0) throw std::invalid_argument("assemble_flux_mass: R_inv must be > 0");
    for (int r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::Storage::InnerIterator it(m, r); it; ++it)
        triplets.emplace_back(i * n_free + it.row(), i * n_free + it.col(), R_inv[i] * it.value());
  }
  return SparseMatrix::from_triplets(n * n_free, n * n_free, triplets);
}

SparseMatrix assemble_div(const Mesh& mesh, const ShapeTable& table, const DofMap& map,
                          const std::vector<int>& index_of, int n_free) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.cell_count()) * table.shapes_per_cell);
  for (int c = 0; c < mesh.cell_count(); ++c) {
    for (int s = 0; s < table.shapes_per_cell; ++s) {
      const int g = index_of[map.dof(c, s)];
      if (g < 0) continue;
      triplets.emplace_back(c, g, -table.divergence(c, s) * mesh.cell_area[c]);
    }
  }
  return SparseMatrix::from_triplets(mesh.cell_count(), n_free, triplets);
}

SparseMatrix assemble_elasticity(const Mesh& mesh, const ShapeTable& bdm_table, const DofMap& bdm_map,
                                 double eta, double lambda, const std::vector<char>& dg_edge,
                                 const std::vector<int>& index_of, int n_free,
                                 SparseMatrix* strain_form, SparseMatrix* divdiv_form) {
  if (eta <= 0.0) throw std::invalid_argument("assemble_elasticity: eta must be > 0");
  std::vector<Triplet> triplets, strain_triplets, divdiv_triplets;
  const int nl = bdm_table.shapes_per_cell;

  // Volume terms: strains and divergences are cellwise constant.
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const double area = mesh.cell_area[c];
    for (int a = 0; a < nl; ++a) {
      const int ga = index_of[bdm_map.dof(c, a)];
      if (ga < 0) continue;
      const Mat2 eps_a = bdm_table.strain(c, a);
      const double div_a = bdm_table.divergence(c, a);
      for (int b = 0; b < nl; ++b) {
        const int gb = index_of[bdm_map.dof(c, b)];
        if (gb < 0) continue;
        const double ee = area * tensor_dot(eps_a, bdm_table.strain(c, b));
        const double dd = area * div_a * bdm_table.divergence(c, b);
        triplets.emplace_back(ga, gb, ee + lambda * dd);
        if (strain_form) strain_triplets.emplace_back(ga, gb, ee);
        if (divdiv_form) divdiv_triplets.emplace_back(ga, gb, dd);
      }
    }
  }

  // Edge terms: consistency couples the constant strain average with the
  // tangential jump, the penalty scales with eta/h_e.
  const EdgeRule& rule = edge_rule_default();
  struct EdgeShape {
    int global;
    double jump_factor;
    Vec2 avg_traction;  // weight * strain(shape) * n_e
    int cell;
    int local;
  };
  std::vector<EdgeShape> shapes;
  for (int e = 0; e < mesh.edge_count(); ++e) {
    if (!dg_edge[e]) continue;
    const Edge& edge = mesh.edges[e];
    const bool boundary = edge.cell[1] < 0;
    const double avg_weight = boundary ? 1.0 : 0.5;
    shapes.clear();
    for (int side = 0; side < (boundary ? 1 : 2); ++side) {
      const int c = edge.cell[side];
      for (int s = 0; s < nl; ++s) {
        EdgeShape es;
        es.global = index_of[bdm_map.dof(c, s)];
        es.jump_factor = side == 0 ? 1.0 : -1.0;
        es.avg_traction = avg_weight * (bdm_table.strain(c, s) * edge.normal);
        es.cell = c;
        es.local = s;
        shapes.push_back(es);
      }
    }
    const std::size_t ns = shapes.size();
    std::vector<double> k_local(ns * ns, 0.0);
    std::vector<Vec2> jumps(ns);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = mesh.edge_point(e, rule.points[q]);
      const double w = edge.length * rule.weights[q];
      for (std::size_t a = 0; a < ns; ++a) {
        const Vec2 val = bdm_table.value(shapes[a].cell, shapes[a].local, x - mesh.centroid(shapes[a].cell));
        const Vec2 tangential = val - val.dot(edge.normal) * edge.normal;
        jumps[a] = shapes[a].jump_factor * tangential;
      }
      for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < ns; ++b)
          k_local[a * ns + b] += w * (-shapes[a].avg_traction.dot(jumps[b]) -
                                      shapes[b].avg_traction.dot(jumps[a]) +
                                      (eta / edge.length) * jumps[a].dot(jumps[b]));
    }
    for (std::size_t a = 0; a < ns; ++a) {
      if (shapes[a].global < 0) continue;
      for (std::size_t b = 0; b < ns; ++b) {
        if (shapes[b].global < 0) continue;
        triplets.emplace_back(shapes[a].global, shapes[b].global, k_local[a * ns + b]);
      }
    }
  }

  if (strain_form) *strain_form = SparseMatrix::from_triplets(n_free, n_free, strain_triplets);
  if (divdiv_form) *divdiv_form = SparseMatrix::from_triplets(n_free, n_free, divdiv_triplets);
  return SparseMatrix::from_triplets(n_free, n_free, triplets);
}

SparseMatrix assemble_pressure_block(const Vec& cell_area, const Eigen::MatrixXd& coeff) {
  const int n = static_cast<int>(coeff.rows());
  const int nc = static_cast<int>(cell_area.size());
  std::vector<Triplet> triplets;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (coeff(i, j) == 0.0) continue;
      for (int c = 0; c < nc; ++c)
        triplets.emplace_back(i * nc + c, j * nc + c, coeff(i, j) * cell_area[c]);
    }
  return SparseMatrix::from_triplets(n * nc, n * nc, triplets);
}

namespace {

SparseMatrix replicate_block_diagonal(const SparseMatrix& block, int copies) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(copies) * block.nonzeros());
  const auto& m = block.eigen();
  for (int i = 0; i < copies; ++i)
    for (int r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::Storage::InnerIterator it(m, r); it; ++it)
        triplets.emplace_back(i * block.rows() + it.row(), i * block.cols() + it.col(), it.value());
  return SparseMatrix::from_triplets(copies * block.rows(), copies * block.cols(), triplets);
}

SparseMatrix stack_rows(const SparseMatrix& block, int copies) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(copies) * block.nonzeros());
  const auto& m = block.eigen();
  for (int i = 0; i < copies; ++i)
    for (int r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::Storage::InnerIterator it(m, r); it; ++it)
        triplets.emplace_back(i * block.rows() + it.row(), it.col(), it.value());
  return SparseMatrix::from_triplets(copies * block.rows(), block.cols(), triplets);
}

}  // namespace

BlockSystem assemble_system(std::shared_ptr<const Mesh> mesh_ptr, const ProblemSpec& spec,
                            const AssemblyOptions& options) {
  spec.validate();
  const Mesh& mesh = *mesh_ptr;
  BlockSystem sys;
  sys.mesh = mesh_ptr;
  sys.networks = spec.networks;
  sys.scaled = spec.scale();
  sys.lambdas = build_lambdas(sys.scaled);
  sys.stab = compute_stabilization(sys.scaled, 2, options.beta_s2, options.beta_d2, options.use_theta0);
  sys.S_coeff = sys.lambdas.s_coeff(sys.stab.L1, sys.stab.L2);
  sys.S_coeff_inv = sys.S_coeff.ldlt().solve(Eigen::MatrixXd::Identity(sys.networks, sys.networks));
  sys.pressure_norm_coeff = sys.lambdas.lambda4 +
                            sys.stab.theta * sys.stab.beta_v2 * sys.lambdas.lambda3 +
                            sys.lambdas.coupling;

  sys.rt_map = build_dofmap(mesh, SpaceKind::RT0);
  sys.bdm_map = build_dofmap(mesh, SpaceKind::BDM1);
  sys.p0_map = build_dofmap(mesh, SpaceKind::P0);
  sys.rt_table = build_shape_table(mesh, SpaceKind::RT0);
  sys.bdm_table = build_shape_table(mesh, SpaceKind::BDM1);
  sys.cell_area = Vec::Map(mesh.cell_area.data(), mesh.cell_count());
  sys.pressure_per_net = mesh.cell_count();

  // Essential conditions and DG-active edges.
  const int n_edges = mesh.edge_count();
  std::vector<char> dg_edge(n_edges, 0);
  sys.flux_index_of_edge.assign(n_edges, -1);
  sys.disp_index_of_full.assign(2 * n_edges, -1);
  for (int e = 0; e < n_edges; ++e) {
    bool flux_free = true;
    bool disp_free = true;
    if (mesh.is_boundary_edge(e)) {
      const SegmentBC& seg = spec.bc[static_cast<int>(mesh.edge_label[e])];
      flux_free = !seg.flux_sealed;
      disp_free = !seg.displacement_clamped;
      dg_edge[e] = seg.displacement_clamped ? 1 : 0;
    } else {
      dg_edge[e] = 1;
    }
    if (flux_free) {
      sys.flux_index_of_edge[e] = static_cast<int>(sys.flux_dof_edge.size());
      sys.flux_dof_edge.push_back(e);
    }
    if (disp_free) {
      for (int m = 0; m < 2; ++m) {
        sys.disp_index_of_full[2 * e + m] = static_cast<int>(sys.disp_dof_full.size());
        sys.disp_dof_full.push_back(2 * e + m);
      }
    }
  }
  sys.flux_per_net = static_cast<int>(sys.flux_dof_edge.size());
  sys.disp_dofs = static_cast<int>(sys.disp_dof_full.size());

  // Unconstrained constant pressure modes.
  bool all_sealed = true;
  for (const SegmentBC& seg : spec.bc) all_sealed = all_sealed && seg.flux_sealed;
  sys.pressure_nullspace.assign(sys.networks, false);
  for (int i = 0; i < sys.networks; ++i) {
    const bool no_transfer = sys.scaled.alpha_cross.row(i).isZero(0.0);
    if (all_sealed && sys.scaled.alpha_p[i] == 0.0) {
      if (!no_transfer)
        throw std::invalid_argument(
            "assemble_system: sealed network without storage but with transfer coupling is not supported");
      sys.pressure_nullspace[i] = true;
    }
  }

  // Blocks.
  const SparseMatrix div_rt = assemble_div(mesh, sys.rt_table, sys.rt_map, sys.flux_index_of_edge,
                                           sys.flux_per_net);
  const SparseMatrix div_bdm = assemble_div(mesh, sys.bdm_table, sys.bdm_map, sys.disp_index_of_full,
                                            sys.disp_dofs);
  sys.A_v = assemble_flux_mass(mesh, sys.rt_table, sys.rt_map, sys.flux_index_of_edge,
                               sys.flux_per_net, sys.scaled.R_inv);
  sys.B_v = replicate_block_diagonal(div_rt, sys.networks);
  sys.B_u = stack_rows(div_bdm, sys.networks);
  sys.A_u = assemble_elasticity(mesh, sys.bdm_table, sys.bdm_map, options.eta, sys.scaled.lambda,
                                dg_edge, sys.disp_index_of_full, sys.disp_dofs, &sys.strain_form,
                                &sys.divdiv_form);
  sys.C_mat = assemble_pressure_block(sys.cell_area, sys.lambdas.coupling);
  sys.S_mat = assemble_pressure_block(sys.cell_area, sys.S_coeff);

  // Right-hand sides. Loads use the high-order rule; the boundary data are
  // converted to the transformed variables p~_i = a_i p_i / (2 mu),
  // t~ = (t + sum_i (1 - alpha_i) p_i n) / (2 mu).
  const QuadratureRule& load_rule = triangle_rule_high_order();
  sys.rhs_v = Vec::Zero(sys.flux_size());
  sys.rhs_g = Vec::Zero(sys.pressure_size());
  sys.rhs_f = Vec::Zero(sys.disp_dofs);

  if (!spec.g.empty()) {
    for (int i = 0; i < sys.networks; ++i) {
      if (!spec.g[i]) continue;
      for (int c = 0; c < mesh.cell_count(); ++c) {
        double integral = 0.0;
        for (std::size_t q = 0; q < load_rule.points.size(); ++q)
          integral += 2.0 * mesh.cell_area[c] * load_rule.weights[q] *
                      spec.g[i](physical_point(mesh, c, load_rule.points[q]));
        sys.rhs_g[i * sys.pressure_per_net + c] = integral;
      }
    }
  }
  if (spec.f) {
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const Vec2 xc = mesh.centroid(c);
      for (std::size_t q = 0; q < load_rule.points.size(); ++q) {
        const Vec2 x = physical_point(mesh, c, load_rule.points[q]);
        const Vec2 fx = spec.f(x);
        const double w = 2.0 * mesh.cell_area[c] * load_rule.weights[q];
        for (int s = 0; s < 6; ++s) {
          const int g = sys.disp_index_of_full[sys.bdm_map.dof(c, s)];
          if (g < 0) continue;
          sys.rhs_f[g] += w * fx.dot(sys.bdm_table.value(c, s, x - xc));
        }
      }
    }
  }

  const EdgeRule& edge_rule = edge_rule_default();
  for (int e = 0; e < n_edges; ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const Edge& edge = mesh.edges[e];
    const SegmentBC& seg = spec.bc[static_cast<int>(mesh.edge_label[e])];

    if (seg.pressure_dirichlet) {
      for (int i = 0; i < sys.networks; ++i) {
        const int g = sys.flux_index_of_edge[e];
        if (g < 0) continue;
        const double scaled_value =
            sys.scaled.alpha_raw[i] * seg.pressure_value[i] / sys.scaled.two_mu;
        sys.rhs_v[i * sys.flux_per_net + g] -= scaled_value * edge.length;
      }
    }
    if (!seg.displacement_clamped) {
      Vec2 traction = seg.traction;
      if (seg.pressure_dirichlet) {
        double p_sum = 0.0;
        for (int i = 0; i < sys.networks; ++i)
          p_sum += (1.0 - sys.scaled.alpha_raw[i]) * seg.pressure_value[i];
        traction += p_sum * edge.normal;
      } else {
        for (double a : sys.scaled.alpha_raw)
          if (a != 1.0 && traction.norm() > 0.0)
            throw std::invalid_argument(
                "assemble_system: traction side without pressure data needs unit Biot-Willis "
                "coefficients");
      }
      traction /= sys.scaled.two_mu;
      if (traction.norm() == 0.0) continue;
      const int c = edge.cell[0];
      const Vec2 xc = mesh.centroid(c);
      for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
        const Vec2 x = mesh.edge_point(e, edge_rule.points[q]);
        const double w = edge.length * edge_rule.weights[q];
        for (int s = 0; s < 6; ++s) {
          const int g = sys.disp_index_of_full[sys.bdm_map.dof(c, s)];
          if (g < 0) continue;
          sys.rhs_f[g] += w * traction.dot(sys.bdm_table.value(c, s, x - xc));
        }
      }
    }
  }

  return sys;
}

Vec AugmentedSystem::apply_M(const Vec& z) const {
  const BlockSystem& s = *sys;
  const int nc = s.pressure_per_net;
  Vec y = Vec::Zero(z.size());
  if (M_coeff.isZero(0.0)) return y;
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < s.networks; ++i) {
      double acc = 0.0;
      for (int j = 0; j < s.networks; ++j) acc += M_coeff(i, j) * z[j * nc + c];
      y[i * nc + c] = acc / s.cell_area[c];
    }
  }
  return y;
}

Vec AugmentedSystem::apply(const Vec& x) const {
  const BlockSystem& s = *sys;
  const Vec xv = s.v_part(x), xp = s.p_part(x), xu = s.u_part(x);
  const Vec row2 = s.B_v.apply(xv) - s.C_mat.apply(xp) + s.B_u.apply(xu);
  Vec y(x.size());
  s.v_part(y) = s.A_v.apply(xv) + s.B_v.apply_transpose(Vec(xp + apply_M(row2)));
  s.p_part(y) = -row2;
  s.u_part(y) = s.B_u.apply_transpose(xp) + s.A_u.apply(xu);
  return y;
}

AugmentedSystem augment(const BlockSystem& sys, bool zero_m) {
  AugmentedSystem aug;
  aug.sys = &sys;
  aug.M_coeff = zero_m ? Eigen::MatrixXd::Zero(sys.networks, sys.networks).eval() : sys.S_coeff_inv;

  // A_v + B_v^T M B_v; the augmentation couples the flux dofs of one cell
  // across networks through S_coeff^{-1}.
  std::vector<Triplet> triplets;
  const auto& av = sys.A_v.eigen();
  for (int r = 0; r < av.outerSize(); ++r)
    for (SparseMatrix::Storage::InnerIterator it(av, r); it; ++it)
      triplets.emplace_back(it.row(), it.col(), it.value());
  if (!zero_m) {
    const Mesh& mesh = *sys.mesh;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const double area = mesh.cell_area[c];
      std::array<int, 3> idx;
      std::array<double, 3> div_area;
      for (int k = 0; k < 3; ++k) {
        idx[k] = sys.flux_index_of_edge[sys.rt_map.dof(c, k)];
        div_area[k] = sys.rt_table.divergence(c, k) * area;  // +- edge length
      }
      for (int i = 0; i < sys.networks; ++i)
        for (int j = 0; j < sys.networks; ++j) {
          const double m = sys.S_coeff_inv(i, j);
          if (m == 0.0) continue;
          for (int a = 0; a < 3; ++a) {
            if (idx[a] < 0) continue;
            for (int b = 0; b < 3; ++b) {
              if (idx[b] < 0) continue;
              triplets.emplace_back(i * sys.flux_per_net + idx[a], j * sys.flux_per_net + idx[b],
                                    m * div_area[a] * div_area[b] / area);
            }
          }
        }
    }
  }
  aug.flux_block = SparseMatrix::from_triplets(sys.flux_size(), sys.flux_size(), triplets);

  aug.rhs = Vec(sys.total_size());
  sys.v_part(aug.rhs) = sys.rhs_v + sys.B_v.apply_transpose(aug.apply_M(sys.rhs_g));
  sys.p_part(aug.rhs) = -sys.rhs_g;
  sys.u_part(aug.rhs) = sys.rhs_f;
  return aug;
}

void export_blocks(const BlockSystem& sys, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto path = [&directory](const char* name) { return (fs::path(directory) / name).string(); };
  write_matrix_market(sys.A_v, path("A_v.mtx"));
  write_matrix_market(sys.B_v, path("B_v.mtx"));
  write_matrix_market(sys.B_u, path("B_u.mtx"));
  write_matrix_market(sys.A_u, path("A_u.mtx"));
  write_matrix_market(sys.C_mat, path("C.mtx"));
  write_matrix_market(sys.S_mat, path("S.mtx"));
  write_matrix_market_vector(sys.rhs_v, path("rhs_v.mtx"));
  write_matrix_market_vector(sys.rhs_g, path("rhs_g.mtx"));
  write_matrix_market_vector(sys.rhs_f, path("rhs_f.mtx"));
}

void elasticity_spd_check(const ProblemSpec& spec, const AssemblyOptions& options) {
  auto mesh = std::make_shared<Mesh>(build_structured_mesh(2));
  const BlockSystem sys = assemble_system(mesh, spec, options);
  factorize(sys.A_u, true, "A_u (coarse SPD self-check)");
}

}  // namespace mpet
