#pragma once

#include <vector>

#include "mesh.hpp"

namespace mpet {

enum class SpaceKind { RT0, BDM1, P0 };

// Degree-of-freedom functionals are oriented by the globally stored edge
// normal and edge parametrization (lower to higher vertex id):
//   RT0:  mean normal trace over the edge,
//   BDM1: normal trace values at the two edge endpoints (a then b),
//   P0:   cell mean.
// Both cells incident to an edge see the same functionals, which makes the
// local-to-global map sign-free and gives exact normal continuity.
struct DofMap {
  SpaceKind kind;
  int dof_count = 0;
  int dofs_per_cell = 0;
  std::vector<int> cell_dofs;           // cell-major blocks of dofs_per_cell
  std::vector<signed char> cell_signs;  // orientation signs (all +1 here)
  std::vector<int> dof_entity;          // edge id (RT0/BDM1) or cell id (P0)

  int dof(int cell, int local) const { return cell_dofs[cell * dofs_per_cell + local]; }
};

DofMap build_dofmap(const Mesh& mesh, SpaceKind kind);

// Local vector-valued shape functions per cell, expressed in physical
// coordinates relative to the cell centroid:
//   value(x) = (c0 + c2 xi + c3 eta, c1 + c4 xi + c5 eta),  (xi,eta) = x - centroid.
// RT0 uses the 3-parameter subspace c2 = c5, c3 = c4 = 0. Divergence and
// gradient are cellwise constant.
struct ShapeTable {
  SpaceKind kind;
  int shapes_per_cell = 0;
  std::vector<double> coeff;  // cell-major: shapes_per_cell * 6 per cell

  const double* cell_coeff(int cell, int shape) const {
    return coeff.data() + (static_cast<std::size_t>(cell) * shapes_per_cell + shape) * 6;
  }
  Vec2 value(int cell, int shape, const Vec2& rel) const {
    const double* c = cell_coeff(cell, shape);
    return Vec2(c[0] + c[2] * rel.x() + c[3] * rel.y(), c[1] + c[4] * rel.x() + c[5] * rel.y());
  }
  double divergence(int cell, int shape) const {
    const double* c = cell_coeff(cell, shape);
    return c[2] + c[5];
  }
  Mat2 gradient(int cell, int shape) const {
    const double* c = cell_coeff(cell, shape);
    Mat2 g;
    g << c[2], c[3], c[4], c[5];
    return g;
  }
  Mat2 strain(int cell, int shape) const {
    const Mat2 g = gradient(cell, shape);
    return 0.5 * (g + g.transpose());
  }
};

// Builds the physical-space local bases dual to the DofMap functionals.
ShapeTable build_shape_table(const Mesh& mesh, SpaceKind kind);

// Values and divergences of all local shape functions at a physical point of
// the given cell. P0 returns the single constant shape with zero gradient.
struct BasisEval {
  std::vector<Vec2> values;
  std::vector<double> divergences;
};
BasisEval eval_basis(const Mesh& mesh, const ShapeTable& table, int cell, const Vec2& point);

}  // namespace mpet
