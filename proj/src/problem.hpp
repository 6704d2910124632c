#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "mesh.hpp"
#include "model.hpp"

namespace mpet {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

// Boundary data for one side of the square. Exactly one displacement
// condition (clamped or traction) and one pressure-field condition
// (Dirichlet pressures or sealed, v.n = 0) per side.
struct SegmentBC {
  bool displacement_clamped = false;   // u = 0: normal dofs eliminated, tangential weak
  Vec2 traction = Vec2::Zero();        // total-stress traction data (raw units)
  bool pressure_dirichlet = false;     // pressures given on the side (raw units)
  std::vector<double> pressure_value;  // per network
  bool flux_sealed = false;            // v.n = 0 eliminated
};

struct ProblemSpec {
  std::string name;
  int networks = 1;

  // Either raw physical parameters to be rescaled, or coefficients stated
  // directly in dimensionless form.
  std::optional<RawModelParams> raw;
  std::optional<ScaledParams> scaled_direct;

  std::array<SegmentBC, 4> bc;  // bottom, right, top, left

  // Volumetric sources in the scaled variables (as used in the assembled
  // conservation and momentum equations). Empty means zero.
  std::vector<ScalarField> g;
  VectorField f;

  ScaledParams scale() const;
  void validate() const;
};

// Single-network problem with the polynomial data
//   phi2 = 900 x^2(x-1)^2 y^2(y-1)^2,
//   g = R (d phi2/dx + d phi2/dy) - alpha_p (phi2 - 1)
// and the matching momentum load; clamped and sealed on the whole boundary.
// Coefficients are dimensionless.
ProblemSpec make_biot_manufactured(double lambda, double R_inv, double alpha_p);

// Two-network cantilever configuration: clamped on the left side, traction
// (0,-1) on top, traction-free bottom/right, pressures (2, 20) prescribed on
// the whole boundary, zero sources. beta_choice selects between the two
// tabulated transfer coefficients.
ProblemSpec make_barenblatt(double conductivity_scale = 1.0, double lambda_scale = 1.0,
                            double tau = 1.0, double beta_choice = 5.0e-10);

// Four-network variant with pressures (2, 20, 30, 40) on the whole boundary.
// k3_scale scales the low-conductivity network, lambda_scale the Lame lambda.
ProblemSpec make_four_network(double k3_scale = 1.0, double lambda_scale = 1.0, double tau = 1.0);

// n-network scaling configuration, dimensionless coefficients lambda = 1e3,
// R_inv = 1e4, alpha_p = 1e-4, no transfer; p_i = 10 on the whole boundary.
ProblemSpec make_scaling(int networks);

// Reference parameter tables.
RawModelParams barenblatt_params(double beta_choice = 5.0e-10);
RawModelParams four_network_params();

// Flat key=value parameter files; vector entries comma-separated, beta given
// as beta_ij keys for i < j.
RawModelParams read_params_file(const std::string& path);
void write_params_file(const RawModelParams& params, const std::string& path);

}  // namespace mpet
