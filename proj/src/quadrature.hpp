#pragma once

#include <array>
#include <vector>

namespace mpet {

// Rule on the reference triangle (0,0),(1,0),(0,1). Points are barycentric,
// weights sum to the reference area 1/2. A rule of exactness degree d
// integrates all polynomials of total degree <= d exactly.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

// Symmetric 6-point rule, degree 4. Exact for every bilinear-form integrand of
// the lowest-order mixed/DG discretization.
const QuadratureRule& triangle_rule_degree4();

// Collapsed 6x6 Gauss rule, degree >= 10. Used for data load functionals.
const QuadratureRule& triangle_rule_high_order();

// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};
const EdgeRule& edge_rule_default();  // 3 points, degree 5

std::vector<double> gauss_legendre_01_points(int n);
std::vector<double> gauss_legendre_01_weights(int n);

}  // namespace mpet
