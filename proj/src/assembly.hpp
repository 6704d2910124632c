#pragma once

#include <memory>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "mesh.hpp"
#include "model.hpp"
#include "problem.hpp"
#include "spaces.hpp"

namespace mpet {

struct AssemblyOptions {
  double eta = 10.0;  // tangential-jump penalty weight
  double beta_s2 = 0.18;
  double beta_d2 = 0.18;
  bool use_theta0 = false;
};

// Assembled blocks of the three-field system
//   [ A_v  B_v^T  0   ] [v]   [rhs_v]
//   [ B_v  -C     B_u ] [p] = [rhs_g]
//   [ 0    B_u^T  A_u ] [u]   [rhs_f]
// on the essential-condition-reduced dof sets. Stacked vectors are ordered
// [v_1..v_n | p_1..p_n | u]; pressures are cell-major within each network.
struct BlockSystem {
  std::shared_ptr<const Mesh> mesh;
  int networks = 1;
  int flux_per_net = 0;      // free flux dofs per network
  int pressure_per_net = 0;  // cell count
  int disp_dofs = 0;         // free displacement dofs

  // Reduced index <-> full entity maps.
  std::vector<int> flux_dof_edge;        // reduced flux dof -> edge id
  std::vector<int> flux_index_of_edge;   // edge id -> reduced index or -1
  std::vector<int> disp_dof_full;        // reduced disp dof -> full BDM dof
  std::vector<int> disp_index_of_full;   // full BDM dof -> reduced index or -1

  SparseMatrix A_v, B_v, B_u, A_u;
  SparseMatrix C_mat, S_mat;
  // Broken strain and div-div forms on the displacement space, for the
  // energy norms of the convergence diagnostics.
  SparseMatrix strain_form, divdiv_form;
  Vec rhs_v, rhs_g, rhs_f;
  Vec cell_area;

  ScaledParams scaled;
  LambdaSet lambdas;
  StabilizationConstants stab;
  Eigen::MatrixXd S_coeff, S_coeff_inv;
  Eigen::MatrixXd pressure_norm_coeff;  // Lambda4 + theta beta_v^2 Lambda3 + coupling

  // Networks whose constant pressure mode is unconstrained (no storage, no
  // transfer, fully sealed boundary); pinned to zero mean by the solvers.
  std::vector<bool> pressure_nullspace;
  bool has_pressure_nullspace() const;

  DofMap rt_map, bdm_map, p0_map;
  ShapeTable rt_table, bdm_table;

  int flux_size() const { return networks * flux_per_net; }
  int pressure_size() const { return networks * pressure_per_net; }
  int total_size() const { return flux_size() + pressure_size() + disp_dofs; }

  // Segment views into a stacked vector.
  auto v_part(Vec& x) const { return x.segment(0, flux_size()); }
  auto p_part(Vec& x) const { return x.segment(flux_size(), pressure_size()); }
  auto u_part(Vec& x) const { return x.segment(flux_size() + pressure_size(), disp_dofs); }
  auto v_part(const Vec& x) const { return x.segment(0, flux_size()); }
  auto p_part(const Vec& x) const { return x.segment(flux_size(), pressure_size()); }
  auto u_part(const Vec& x) const { return x.segment(flux_size() + pressure_size(), disp_dofs); }

  // Area-weighted mean removal on nullspace-flagged networks.
  void project_pressure_nullspace(Eigen::Ref<Vec> p) const;
};

BlockSystem assemble_system(std::shared_ptr<const Mesh> mesh, const ProblemSpec& spec,
                            const AssemblyOptions& options = {});

// Individual block assemblers. index_of maps full dof ids to reduced indices
// (-1 = eliminated).
SparseMatrix assemble_flux_mass(const Mesh& mesh, const ShapeTable& rt_table, const DofMap& rt_map,
                                const std::vector<int>& index_of, int n_free,
                                const std::vector<double>& R_inv);
SparseMatrix assemble_mass_single(const Mesh& mesh, const ShapeTable& table, const DofMap& map,
                                  const std::vector<int>& index_of, int n_free);
// Pairing -(div ., P0); rows are cells, exact for cellwise-constant divergences.
SparseMatrix assemble_div(const Mesh& mesh, const ShapeTable& table, const DofMap& map,
                          const std::vector<int>& index_of, int n_free);
// Interior-penalty elasticity plus lambda (div,div). dg_edge flags the edges
// carrying jump terms (all interior edges plus clamped boundary edges).
SparseMatrix assemble_elasticity(const Mesh& mesh, const ShapeTable& bdm_table, const DofMap& bdm_map,
                                 double eta, double lambda, const std::vector<char>& dg_edge,
                                 const std::vector<int>& index_of, int n_free,
                                 SparseMatrix* strain_form = nullptr,
                                 SparseMatrix* divdiv_form = nullptr);
// coeff (x) diag(cell areas) for an n x n coefficient matrix.
SparseMatrix assemble_pressure_block(const Vec& cell_area, const Eigen::MatrixXd& coeff);

// Row-eliminated augmented form
//   [ A_v + B_v^T M B_v   B_v^T - B_v^T M C   B_v^T M B_u ] [v]   [rhs_v + B_v^T M rhs_g]
//   [ -B_v                C                   -B_u        ] [p] = [-rhs_g]
//   [ 0                   B_u^T               A_u         ] [u]   [rhs_f]
// with M = S^{-1} applied through dense per-cell solves. zero_m replaces M by
// zero, which reduces the top row to the unaugmented one.
struct AugmentedSystem {
  const BlockSystem* sys = nullptr;
  Eigen::MatrixXd M_coeff;  // S_coeff^{-1}, or zero
  SparseMatrix flux_block;  // A_v + B_v^T M B_v
  Vec rhs;

  Vec apply(const Vec& x) const;
  // M z for a pressure-layout vector, i.e. (S_coeff^{-1} (x) M_p^{-1}) z.
  Vec apply_M(const Vec& z) const;
};

AugmentedSystem augment(const BlockSystem& sys, bool zero_m = false);

// Matrix Market export of all assembled blocks and right-hand sides.
void export_blocks(const BlockSystem& sys, const std::string& directory);

// Assembles the clamped-side elasticity block on a coarse mesh and verifies
// it factors as SPD with the configured penalty.
void elasticity_spd_check(const ProblemSpec& spec, const AssemblyOptions& options);

}  // namespace mpet
