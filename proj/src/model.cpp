#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpet {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void RawModelParams::validate() const {
  const std::size_t n = static_cast<std::size_t>(networks);
  require(networks >= 1, "RawModelParams: networks must be >= 1");
  require(mu > 0.0, "RawModelParams: mu must be > 0");
  require(lambda >= 0.0, "RawModelParams: lambda must be >= 0");
  require(tau > 0.0, "RawModelParams: tau must be > 0");
  require(c_p.size() == n, "RawModelParams: c_p size mismatch");
  require(alpha.size() == n, "RawModelParams: alpha size mismatch");
  require(K.size() == n, "RawModelParams: K size mismatch");
  require(beta.rows() == networks && beta.cols() == networks, "RawModelParams: beta size mismatch");
  for (int i = 0; i < networks; ++i) {
    require(c_p[i] >= 0.0, "RawModelParams: c_p must be >= 0");
    require(alpha[i] > 0.0, "RawModelParams: alpha must be > 0");
    require(K[i] > 0.0, "RawModelParams: K must be > 0");
    require(beta(i, i) == 0.0, "RawModelParams: beta diagonal must be zero");
    for (int j = 0; j < networks; ++j) {
      require(beta(i, j) >= 0.0, "RawModelParams: beta must be >= 0");
      require(beta(i, j) == beta(j, i), "RawModelParams: beta must be symmetric");
    }
  }
}

void ScaledParams::validate() const {
  require(networks >= 1, "ScaledParams: networks must be >= 1");
  require(lambda >= 0.0, "ScaledParams: lambda must be >= 0");
  require(R_inv.size() == static_cast<std::size_t>(networks), "ScaledParams: R_inv size mismatch");
  require(alpha_p.size() == static_cast<std::size_t>(networks), "ScaledParams: alpha_p size mismatch");
  require(alpha_cross.rows() == networks && alpha_cross.cols() == networks,
          "ScaledParams: alpha_cross size mismatch");
  for (int i = 0; i < networks; ++i) {
    require(R_inv[i] > 0.0, "ScaledParams: R_inv must be > 0");
    require(alpha_p[i] >= 0.0, "ScaledParams: alpha_p must be >= 0");
    for (int j = 0; j < networks; ++j)
      require(alpha_cross(i, j) >= 0.0, "ScaledParams: alpha_cross must be >= 0");
  }
}

ScaledParams rescale(const RawModelParams& raw) {
  raw.validate();
  const int n = raw.networks;
  ScaledParams s;
  s.networks = n;
  const double two_mu = 2.0 * raw.mu;
  s.two_mu = two_mu;
  s.lambda = raw.lambda / two_mu;
  const double tau_s = raw.tau / two_mu;
  s.alpha_raw = raw.alpha;
  s.R_inv.resize(n);
  s.alpha_p.resize(n);
  s.alpha_cross = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double a_i = raw.alpha[i] / two_mu;
    s.R_inv[i] = a_i * a_i / (tau_s * raw.K[i]);
    s.alpha_p[i] = (raw.c_p[i] / two_mu) / (a_i * a_i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double a_j = raw.alpha[j] / two_mu;
      s.alpha_cross(i, j) = tau_s * raw.beta(i, j) / (a_i * a_j);
      s.alpha_cross(i, i) += tau_s * raw.beta(i, j) / (a_i * a_i);
    }
  }
  s.lambda0 = std::max(1.0, s.lambda);
  s.R = 1.0 / *std::max_element(s.R_inv.begin(), s.R_inv.end());
  s.validate();
  return s;
}

ScaledParams direct_scaled(int networks, double lambda, std::vector<double> R_inv,
                           std::vector<double> alpha_p, Eigen::MatrixXd alpha_cross) {
  ScaledParams s;
  s.networks = networks;
  s.lambda = lambda;
  s.R_inv = std::move(R_inv);
  s.alpha_p = std::move(alpha_p);
  s.alpha_cross = std::move(alpha_cross);
  if (s.alpha_cross.size() == 0) s.alpha_cross = Eigen::MatrixXd::Zero(networks, networks);
  s.lambda0 = std::max(1.0, lambda);
  s.R = 1.0 / *std::max_element(s.R_inv.begin(), s.R_inv.end());
  s.two_mu = 1.0;
  s.alpha_raw.assign(networks, 1.0);
  s.validate();
  return s;
}

LambdaSet build_lambdas(const ScaledParams& scaled) {
  const int n = scaled.networks;
  LambdaSet set;
  set.lambda0 = scaled.lambda0;
  set.R = scaled.R;
  set.lambda1 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    set.lambda1(i, i) = scaled.alpha_cross(i, i);
    for (int j = 0; j < n; ++j)
      if (j != i) set.lambda1(i, j) = -scaled.alpha_cross(i, j);
  }
  set.lambda2 = Eigen::VectorXd::Map(scaled.alpha_p.data(), n).asDiagonal();
  set.lambda3 = scaled.R * Eigen::MatrixXd::Identity(n, n);
  set.lambda4 = Eigen::MatrixXd::Constant(n, n, 1.0 / scaled.lambda0);
  set.coupling = set.lambda1 + set.lambda2;
  return set;
}

double StabilizationConstants::rate_bound() const {
  const double inv_bs2 = 1.0 / beta_s2;
  return std::sqrt(std::max(inv_bs2 / (c_K2 + inv_bs2), 0.5));
}

StabilizationConstants compute_stabilization(const ScaledParams& scaled, int dim, double beta_s2,
                                             double beta_d2, bool use_theta0) {
  require(dim >= 1, "compute_stabilization: dim must be >= 1");
  require(beta_s2 > 0.0 && beta_d2 > 0.0, "compute_stabilization: inf-sup constants must be > 0");
  StabilizationConstants c;
  c.c_K2 = 1.0 / dim;
  c.beta_s2 = beta_s2;
  c.beta_d2 = beta_d2;
  c.beta_v2 = beta_d2;
  const double lambda = scaled.lambda;
  const double lambda0 = scaled.lambda0;
  const double n = scaled.networks;
  c.theta = use_theta0 ? 1.0 / beta_d2 : 2.0 * (1.0 / beta_s2 + lambda) / lambda0;
  c.L2 = lambda0 / ((c.c_K2 + lambda) * (1.0 + c.theta * beta_d2 * scaled.R * lambda0 / n));
  c.L1 = c.theta * beta_d2 * c.L2;
  c.L_fixed_stress = 1.0 / (1.0 + lambda);
  c.L_fixed_stress_min = 1.0 / (lambda + c.c_K2);
  return c;
}

double sherman_morrison_sum(double a, double b, int n) {
  if (a <= 0.0) throw std::invalid_argument("sherman_morrison_sum: a must be > 0");
  if (b <= 0.0) throw std::invalid_argument("sherman_morrison_sum: b must be > 0");
  if (n < 1) throw std::invalid_argument("sherman_morrison_sum: n must be >= 1");
  return n / (a + n * b);
}

}  // namespace mpet
