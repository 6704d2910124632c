#include "quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace mpet {

namespace {

// Gauss-Legendre on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

QuadratureRule make_degree4() {
  QuadratureRule rule;
  rule.degree = 4;
  const double a1 = 0.445948490915965;
  const double w1 = 0.223381589678011;
  const double a2 = 0.091576213509771;
  const double w2 = 0.109951743655322;
  auto add_group = [&rule](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back({b, a, a});
    rule.points.push_back({a, b, a});
    rule.points.push_back({a, a, b});
    for (int k = 0; k < 3; ++k) rule.weights.push_back(0.5 * w);
  };
  add_group(a1, w1);
  add_group(a2, w2);
  return rule;
}

// Duffy transform x = u, y = v(1-u) with a tensor Gauss rule; the Jacobian
// (1-u) raises the u-degree by one, so an m-point rule is exact for total
// degree 2m-2 on the triangle.
QuadratureRule make_high_order() {
  const int m = 6;
  QuadratureRule rule;
  rule.degree = 2 * m - 2;
  const auto u = gauss_legendre_01_points(m);
  const auto wu = gauss_legendre_01_weights(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = u[i];
      const double y = u[j] * (1.0 - u[i]);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(wu[i] * wu[j] * (1.0 - u[i]));
    }
  }
  return rule;
}

}  // namespace

std::vector<double> gauss_legendre_01_points(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 0.5 * (x[n - 1 - i] + 1.0);
  return out;
}

std::vector<double> gauss_legendre_01_weights(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 0.5 * w[n - 1 - i];
  return out;
}

const QuadratureRule& triangle_rule_degree4() {
  static const QuadratureRule rule = make_degree4();
  return rule;
}

const QuadratureRule& triangle_rule_high_order() {
  static const QuadratureRule rule = make_high_order();
  return rule;
}

const EdgeRule& edge_rule_default() {
  static const EdgeRule rule = [] {
    EdgeRule r;
    r.points = gauss_legendre_01_points(3);
    r.weights = gauss_legendre_01_weights(3);
    r.degree = 5;
    return r;
  }();
  return rule;
}

}  // namespace mpet
