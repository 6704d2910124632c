#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mpet {

// Physical coefficients of the n-network consolidation model in SI units.
struct RawModelParams {
  int networks = 1;
  double lambda = 0.0;  // Lame lambda, N/m^2
  double mu = 1.0;      // Lame mu, N/m^2
  std::vector<double> c_p;    // storage coefficients, 1/(N/m^2)
  std::vector<double> alpha;  // Biot-Willis coefficients
  std::vector<double> K;      // hydraulic conductivities, m^4/(N s)
  Eigen::MatrixXd beta;       // symmetric transfer coefficients, zero diagonal
  double tau = 1.0;           // time-step size, s

  void validate() const;  // throws std::invalid_argument naming the field
};

// Dimensionless coefficients after dividing the system by 2*mu and absorbing
// the Biot-Willis coefficients into the flux and pressure variables:
//   lambda   <- lambda/(2 mu)
//   R_inv_i  =  a_i^2 / (tau_s K_i),  a_i = alpha_i/(2 mu), tau_s = tau/(2 mu)
//   alpha_p_i = (c_p_i/(2 mu)) / a_i^2
//   alpha_cross_ij = tau_s beta_ij / (a_i a_j), diagonal sum_{j!=i} tau_s beta_ij / a_i^2
// two_mu and alpha_raw are kept for converting boundary data into the
// transformed variables p~_i = a_i p_i, traction t~ = t/(2 mu).
struct ScaledParams {
  int networks = 1;
  double lambda = 0.0;
  std::vector<double> R_inv;
  std::vector<double> alpha_p;
  Eigen::MatrixXd alpha_cross;
  double lambda0 = 1.0;  // max{1, lambda}
  double R = 1.0;        // 1 / max_i R_inv_i
  double two_mu = 1.0;
  std::vector<double> alpha_raw;

  void validate() const;
};

ScaledParams rescale(const RawModelParams& raw);

// For experiment configurations stated directly in dimensionless form.
ScaledParams direct_scaled(int networks, double lambda, std::vector<double> R_inv,
                           std::vector<double> alpha_p, Eigen::MatrixXd alpha_cross);

// Network coupling matrices. lambda1 is the alpha-weighted transfer Laplacian
// (PSD), lambda2 the storage diagonal, lambda3 = R*I, lambda4 the rank-one
// all-(1/lambda0) matrix. coupling = lambda1 + lambda2 multiplies the
// pressures in the conservation equations.
struct LambdaSet {
  Eigen::MatrixXd lambda1, lambda2, lambda3, lambda4;
  Eigen::MatrixXd coupling;
  double lambda0 = 1.0;
  double R = 1.0;

  Eigen::MatrixXd s_coeff(double L1, double L2) const {
    return coupling + L1 * lambda3 + L2 * lambda4;
  }
};

LambdaSet build_lambdas(const ScaledParams& scaled);

struct StabilizationConstants {
  double c_K2 = 0.5;     // Korn-type constant squared, 1/d
  double beta_s2 = 0.18; // displacement-pressure inf-sup constant squared
  double beta_d2 = 0.18; // flux-pressure inf-sup constant squared
  double beta_v2 = 0.18; // weight of the Lambda3 term in the pressure norm
  double theta = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L_fixed_stress = 0.0;  // 1/(1 + lambda)
  double L_fixed_stress_min = 0.0;  // 1/(lambda + c_K^2)

  // Bound on the one-step contraction factor of the decoupled scheme in the
  // weighted pressure norm: sqrt(max{beta_s^-2/(c_K^2 + beta_s^-2), 1/2}).
  double rate_bound() const;
};

// theta defaults to the rate-optimal 2(beta_s^-2 + lambda)/lambda0;
// use_theta0 selects theta = beta_d^-2 instead. In both cases
// L2 = lambda0 / ((c_K^2 + lambda)(1 + theta beta_d^2 R lambda0 / n)) and
// L1 = theta beta_d^2 L2.
StabilizationConstants compute_stabilization(const ScaledParams& scaled, int dim = 2,
                                             double beta_s2 = 0.18, double beta_d2 = 0.18,
                                             bool use_theta0 = false);

// Sum of all entries of (a I + b ee^T)^{-1} for the n-vector of ones e.
double sherman_morrison_sum(double a, double b, int n);

}  // namespace mpet
