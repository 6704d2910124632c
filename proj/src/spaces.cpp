#include "spaces.hpp"

#include <stdexcept>

namespace mpet {

DofMap build_dofmap(const Mesh& mesh, SpaceKind kind) {
  DofMap map;
  map.kind = kind;
  const int n_cells = mesh.cell_count();
  switch (kind) {
    case SpaceKind::P0: {
      map.dofs_per_cell = 1;
      map.dof_count = n_cells;
      map.cell_dofs.resize(n_cells);
      map.dof_entity.resize(n_cells);
      for (int c = 0; c < n_cells; ++c) {
        map.cell_dofs[c] = c;
        map.dof_entity[c] = c;
      }
      break;
    }
    case SpaceKind::RT0: {
      map.dofs_per_cell = 3;
      map.dof_count = mesh.edge_count();
      map.cell_dofs.resize(3 * n_cells);
      map.dof_entity.resize(map.dof_count);
      for (int c = 0; c < n_cells; ++c)
        for (int k = 0; k < 3; ++k) map.cell_dofs[3 * c + k] = mesh.cell_edges[c][k];
      for (int e = 0; e < mesh.edge_count(); ++e) map.dof_entity[e] = e;
      break;
    }
    case SpaceKind::BDM1: {
      map.dofs_per_cell = 6;
      map.dof_count = 2 * mesh.edge_count();
      map.cell_dofs.resize(6 * n_cells);
      map.dof_entity.resize(map.dof_count);
      for (int c = 0; c < n_cells; ++c) {
        for (int k = 0; k < 3; ++k) {
          const int e = mesh.cell_edges[c][k];
          map.cell_dofs[6 * c + 2 * k] = 2 * e;
          map.cell_dofs[6 * c + 2 * k + 1] = 2 * e + 1;
        }
      }
      for (int e = 0; e < mesh.edge_count(); ++e) {
        map.dof_entity[2 * e] = e;
        map.dof_entity[2 * e + 1] = e;
      }
      break;
    }
  }
  map.cell_signs.assign(map.cell_dofs.size(), 1);
  return map;
}

namespace {

// Monomial fields relative to the cell centroid in the coefficient layout of
// ShapeTable; RT0 spans {e1, e2, (xi,eta)}, BDM1 the full P1^2.
constexpr double kRt0Monomials[3][6] = {
    {1, 0, 0, 0, 0, 0},
    {0, 1, 0, 0, 0, 0},
    {0, 0, 1, 0, 0, 1},
};
constexpr double kBdm1Monomials[6][6] = {
    {1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}, {0, 0, 1, 0, 0, 0},
    {0, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 1, 0}, {0, 0, 0, 0, 0, 1},
};

Vec2 eval_coeff(const double* c, const Vec2& rel) {
  return Vec2(c[0] + c[2] * rel.x() + c[3] * rel.y(), c[1] + c[4] * rel.x() + c[5] * rel.y());
}

}  // namespace

ShapeTable build_shape_table(const Mesh& mesh, SpaceKind kind) {
  if (kind == SpaceKind::P0) throw std::invalid_argument("build_shape_table: vector spaces only");
  const int n_shapes = kind == SpaceKind::RT0 ? 3 : 6;
  ShapeTable table;
  table.kind = kind;
  table.shapes_per_cell = n_shapes;
  table.coeff.assign(static_cast<std::size_t>(mesh.cell_count()) * n_shapes * 6, 0.0);

  Eigen::MatrixXd dof_of_monomial(n_shapes, n_shapes);
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Vec2 xc = mesh.centroid(c);
    // Dof functionals applied to each monomial field. The normal trace of a
    // linear field is linear along the edge, so endpoint/midpoint evaluations
    // represent the functionals exactly.
    for (int m = 0; m < n_shapes; ++m) {
      const double* mono = kind == SpaceKind::RT0 ? kRt0Monomials[m] : kBdm1Monomials[m];
      for (int k = 0; k < 3; ++k) {
        const int e = mesh.cell_edges[c][k];
        const Edge& edge = mesh.edges[e];
        if (kind == SpaceKind::RT0) {
          const Vec2 mid = mesh.edge_point(e, 0.5) - xc;
          dof_of_monomial(k, m) = eval_coeff(mono, mid).dot(edge.normal);
        } else {
          const Vec2 pa = mesh.vertices[edge.a] - xc;
          const Vec2 pb = mesh.vertices[edge.b] - xc;
          dof_of_monomial(2 * k, m) = eval_coeff(mono, pa).dot(edge.normal);
          dof_of_monomial(2 * k + 1, m) = eval_coeff(mono, pb).dot(edge.normal);
        }
      }
    }
    const Eigen::MatrixXd basis = dof_of_monomial.inverse();  // column s: shape s in monomials
    for (int s = 0; s < n_shapes; ++s) {
      double* out = table.coeff.data() + (static_cast<std::size_t>(c) * n_shapes + s) * 6;
      for (int m = 0; m < n_shapes; ++m) {
        const double* mono = kind == SpaceKind::RT0 ? kRt0Monomials[m] : kBdm1Monomials[m];
        for (int j = 0; j < 6; ++j) out[j] += basis(m, s) * mono[j];
      }
    }
  }
  return table;
}

BasisEval eval_basis(const Mesh& mesh, const ShapeTable& table, int cell, const Vec2& point) {
  if (cell < 0 || cell >= mesh.cell_count()) throw std::invalid_argument("eval_basis: cell out of range");
  BasisEval eval;
  const Vec2 rel = point - mesh.centroid(cell);
  eval.values.resize(table.shapes_per_cell);
  eval.divergences.resize(table.shapes_per_cell);
  for (int s = 0; s < table.shapes_per_cell; ++s) {
    eval.values[s] = table.value(cell, s, rel);
    eval.divergences[s] = table.divergence(cell, s);
  }
  return eval;
}

}  // namespace mpet
