#include "problem.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mpet {

ScaledParams ProblemSpec::scale() const {
  if (scaled_direct) return *scaled_direct;
  if (!raw) throw std::invalid_argument("ProblemSpec: no parameters set");
  return rescale(*raw);
}

void ProblemSpec::validate() const {
  if (networks < 1) throw std::invalid_argument("ProblemSpec: networks must be >= 1");
  if (!raw && !scaled_direct) throw std::invalid_argument("ProblemSpec: no parameters set");
  if (raw && raw->networks != networks) throw std::invalid_argument("ProblemSpec: network count mismatch");
  if (!g.empty() && g.size() != static_cast<std::size_t>(networks))
    throw std::invalid_argument("ProblemSpec: g size mismatch");
  for (const SegmentBC& seg : bc) {
    if (seg.displacement_clamped && (seg.traction.x() != 0.0 || seg.traction.y() != 0.0))
      throw std::invalid_argument("ProblemSpec: side is over-constrained (clamped and traction)");
    if (seg.pressure_dirichlet == seg.flux_sealed)
      throw std::invalid_argument(
          "ProblemSpec: each side needs exactly one of pressure Dirichlet or sealed flux");
    if (seg.pressure_dirichlet && seg.pressure_value.size() != static_cast<std::size_t>(networks))
      throw std::invalid_argument("ProblemSpec: pressure_value size mismatch");
  }
}

ProblemSpec make_biot_manufactured(double lambda, double R_inv, double alpha_p) {
  ProblemSpec spec;
  spec.name = "biot";
  spec.networks = 1;
  spec.scaled_direct = direct_scaled(1, lambda, {R_inv}, {alpha_p}, Eigen::MatrixXd::Zero(1, 1));
  for (SegmentBC& seg : spec.bc) {
    seg.displacement_clamped = true;
    seg.flux_sealed = true;
  }
  const double R = 1.0 / R_inv;
  spec.g.push_back([R, alpha_p](const Vec2& x) {
    const double ax = x.x() * x.x() * (x.x() - 1.0) * (x.x() - 1.0);
    const double ay = x.y() * x.y() * (x.y() - 1.0) * (x.y() - 1.0);
    const double dax = 4.0 * std::pow(x.x(), 3) - 6.0 * x.x() * x.x() + 2.0 * x.x();
    const double day = 4.0 * std::pow(x.y(), 3) - 6.0 * x.y() * x.y() + 2.0 * x.y();
    const double phi2 = 900.0 * ax * ay;
    return R * 900.0 * (ay * dax + ax * day) - alpha_p * (phi2 - 1.0);
  });
  spec.f = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    const double f1 = -(2.0 * y * y * y - 3.0 * y * y + y) * (12.0 * x * x - 12.0 * x + 2.0) -
                      (x - 1.0) * (x - 1.0) * x * x * (12.0 * y - 6.0) +
                      900.0 * (y - 1.0) * (y - 1.0) * y * y * (4.0 * x * x * x - 6.0 * x * x + 2.0 * x);
    const double f2 = (2.0 * x * x * x - 3.0 * x * x + x) * (12.0 * y * y - 12.0 * y + 2.0) +
                      (y - 1.0) * (y - 1.0) * y * y * (12.0 * x - 6.0) +
                      900.0 * (x - 1.0) * (x - 1.0) * x * x * (4.0 * y * y * y - 6.0 * y * y + 2.0 * y);
    return Vec2(f1, f2);
  };
  return spec;
}

RawModelParams barenblatt_params(double beta_choice) {
  if (beta_choice != 5.0e-10 && beta_choice != 1.0e-8)
    throw std::invalid_argument("barenblatt_params: beta must be one of the tabulated values");
  RawModelParams p;
  p.networks = 2;
  p.lambda = 4.2e6;
  p.mu = 2.4e6;
  p.c_p = {5.4e-8, 1.4e-8};
  p.alpha = {0.95, 0.12};
  p.K = {6.18e-12, 2.72e-11};
  p.beta = Eigen::MatrixXd::Zero(2, 2);
  p.beta(0, 1) = p.beta(1, 0) = beta_choice;
  p.tau = 1.0;
  return p;
}

RawModelParams four_network_params() {
  RawModelParams p;
  p.networks = 4;
  p.lambda = 505.0;
  p.mu = 216.0;
  p.c_p.assign(4, 4.5e-10);
  p.alpha.assign(4, 0.99);
  p.K = {3.75e-6, 3.75e-6, 1.57e-9, 3.75e-6};
  p.beta = Eigen::MatrixXd::Zero(4, 4);
  p.beta(0, 1) = p.beta(1, 0) = 1.5e-19;
  p.beta(1, 3) = p.beta(3, 1) = 1.5e-19;
  p.beta(1, 2) = p.beta(2, 1) = 2.0e-19;
  p.beta(2, 3) = p.beta(3, 2) = 1.0e-13;
  p.tau = 1.0;
  return p;
}

namespace {

// Left side clamped, traction (0,-1) on top, traction-free bottom and right,
// pressures prescribed on the whole boundary.
void cantilever_bc(ProblemSpec& spec, const std::vector<double>& pressures) {
  for (int side = 0; side < 4; ++side) {
    SegmentBC& seg = spec.bc[side];
    seg.pressure_dirichlet = true;
    seg.pressure_value = pressures;
    if (side == static_cast<int>(BoundaryLabel::left)) {
      seg.displacement_clamped = true;
    } else if (side == static_cast<int>(BoundaryLabel::top)) {
      seg.traction = Vec2(0.0, -1.0);
    }
  }
}

}  // namespace

ProblemSpec make_barenblatt(double conductivity_scale, double lambda_scale, double tau,
                            double beta_choice) {
  ProblemSpec spec;
  spec.name = "barenblatt";
  spec.networks = 2;
  RawModelParams p = barenblatt_params(beta_choice);
  p.lambda *= lambda_scale;
  p.K[0] *= conductivity_scale;
  p.K[1] *= conductivity_scale;
  p.tau = tau;
  spec.raw = p;
  cantilever_bc(spec, {2.0, 20.0});
  return spec;
}

ProblemSpec make_four_network(double k3_scale, double lambda_scale, double tau) {
  ProblemSpec spec;
  spec.name = "four_network";
  spec.networks = 4;
  RawModelParams p = four_network_params();
  p.lambda *= lambda_scale;
  p.K[2] *= k3_scale;
  p.tau = tau;
  spec.raw = p;
  cantilever_bc(spec, {2.0, 20.0, 30.0, 40.0});
  return spec;
}

ProblemSpec make_scaling(int networks) {
  if (networks < 1) throw std::invalid_argument("make_scaling: networks must be >= 1");
  ProblemSpec spec;
  spec.name = "scaling";
  spec.networks = networks;
  spec.scaled_direct =
      direct_scaled(networks, 1.0e3, std::vector<double>(networks, 1.0e4),
                    std::vector<double>(networks, 1.0e-4), Eigen::MatrixXd::Zero(networks, networks));
  cantilever_bc(spec, std::vector<double>(networks, 10.0));
  return spec;
}

RawModelParams read_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_params_file: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&kv, &path](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("read_params_file: missing key '" + key + "' in " + path);
    return it->second;
  };
  auto parse_list = [](const std::string& s) {
    std::vector<double> v;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  };
  RawModelParams p;
  p.networks = std::stoi(get("networks"));
  p.lambda = std::stod(get("lambda"));
  p.mu = std::stod(get("mu"));
  p.tau = std::stod(get("tau"));
  p.c_p = parse_list(get("c_p"));
  p.alpha = parse_list(get("alpha"));
  p.K = parse_list(get("K"));
  p.beta = Eigen::MatrixXd::Zero(p.networks, p.networks);
  for (int i = 0; i < p.networks; ++i) {
    for (int j = i + 1; j < p.networks; ++j) {
      std::ostringstream key;
      key << "beta_" << i + 1 << j + 1;
      auto it = kv.find(key.str());
      if (it != kv.end()) p.beta(i, j) = p.beta(j, i) = std::stod(it->second);
    }
  }
  p.validate();
  return p;
}

void write_params_file(const RawModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_params_file: cannot open " + path);
  out.precision(17);
  out << "networks = " << params.networks << "\n";
  out << "lambda = " << params.lambda << "\n";
  out << "mu = " << params.mu << "\n";
  out << "tau = " << params.tau << "\n";
  auto write_list = [&out](const std::string& key, const std::vector<double>& v) {
    out << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << "\n";
  };
  write_list("c_p", params.c_p);
  write_list("alpha", params.alpha);
  write_list("K", params.K);
  for (int i = 0; i < params.networks; ++i)
    for (int j = i + 1; j < params.networks; ++j)
      if (params.beta(i, j) != 0.0)
        out << "beta_" << i + 1 << j + 1 << " = " << params.beta(i, j) << "\n";
}

}  // namespace mpet
