#include "linalg.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace mpet {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  Storage m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return SparseMatrix(std::move(m));
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonzeros() << "\n";
  out.precision(17);
  const auto& a = m.eigen();
  for (int r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::Storage::InnerIterator it(a, r); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_matrix_market: empty file " + path);
  bool symmetric = false;
  if (line.rfind("%%MatrixMarket", 0) == 0) {
    if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
      throw std::runtime_error("read_matrix_market: unsupported header in " + path);
    symmetric = line.find("symmetric") != std::string::npos;
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
  }
  std::istringstream sizes(line);
  int rows = 0, cols = 0;
  std::int64_t nnz = 0;
  if (!(sizes >> rows >> cols >> nnz)) throw std::runtime_error("read_matrix_market: bad size line in " + path);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (std::int64_t k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) throw std::runtime_error("read_matrix_market: truncated data in " + path);
    triplets.emplace_back(r - 1, c - 1, v);
    if (symmetric && r != c) triplets.emplace_back(c - 1, r - 1, v);
  }
  return SparseMatrix::from_triplets(rows, cols, triplets);
}

void write_matrix_market_vector(const Vec& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market_vector: cannot open " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
}

Vec read_matrix_market_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market_vector: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket", 0) == 0) {
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
  }
  std::istringstream sizes(line);
  Eigen::Index rows = 0, cols = 0;
  sizes >> rows >> cols;
  Vec v(rows);
  for (Eigen::Index i = 0; i < rows; ++i)
    if (!(in >> v[i])) throw std::runtime_error("read_matrix_market_vector: truncated data in " + path);
  return v;
}

struct Factorization::Impl {
  using ColMajor = Eigen::SparseMatrix<double>;
  std::unique_ptr<Eigen::SimplicialLDLT<ColMajor>> ldlt;
  std::unique_ptr<Eigen::SparseLU<ColMajor>> lu;
  int n = 0;
};

Vec Factorization::solve(const Vec& b) const {
  if (impl_->ldlt) return impl_->ldlt->solve(b);
  return impl_->lu->solve(b);
}

int Factorization::size() const { return impl_->n; }

Factorization factorize(const SparseMatrix& a, bool spd_hint, const std::string& label) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: " + label + " is not square");
  auto impl = std::make_shared<Factorization::Impl>();
  impl->n = a.rows();
  Factorization::Impl::ColMajor col = a.eigen();
  if (spd_hint) {
    impl->ldlt = std::make_unique<Eigen::SimplicialLDLT<Factorization::Impl::ColMajor>>();
    impl->ldlt->compute(col);
    if (impl->ldlt->info() != Eigen::Success)
      throw SingularMatrixError("factorize: LDLT failed on block " + label);
  } else {
    impl->lu = std::make_unique<Eigen::SparseLU<Factorization::Impl::ColMajor>>();
    impl->lu->analyzePattern(col);
    impl->lu->factorize(col);
    if (impl->lu->info() != Eigen::Success)
      throw SingularMatrixError("factorize: LU failed on block " + label);
  }
  Factorization f;
  f.impl_ = std::move(impl);
  return f;
}

Vec random_vector(int size, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vec v(size);
  for (int i = 0; i < size; ++i) v[i] = uniform(gen);
  return v;
}

GmresResult gmres(const LinearOperator& apply_op, const LinearOperator& apply_precond, const Vec& b,
                  double tol_factor, int max_iterations, std::uint64_t seed, const Vec* x0,
                  const std::function<void(int, const Vec&)>& iterate_callback) {
  if (tol_factor <= 1.0) throw std::invalid_argument("gmres: tol_factor must be > 1");
  const int n = static_cast<int>(b.size());
  GmresResult result;
  Vec x = x0 ? *x0 : random_vector(n, seed);

  Vec z = apply_precond(b - apply_op(x));
  const double beta = z.norm();
  result.residual_history.push_back(beta);
  if (beta == 0.0 || max_iterations <= 0) {
    result.x = x;
    result.converged = true;
    return result;
  }
  const double target = beta / tol_factor;

  const int m = max_iterations;
  std::vector<Vec> basis;
  basis.reserve(m + 1);
  basis.push_back(z / beta);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Vec g = Vec::Zero(m + 1);
  g[0] = beta;
  std::vector<double> cs(m), sn(m);

  int k = 0;
  bool happy = false;
  for (; k < m; ++k) {
    Vec w = apply_precond(apply_op(basis[k]));
    // Modified Gram-Schmidt with one reorthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= k; ++i) {
        const double hik = basis[i].dot(w);
        hess(i, k) += hik;
        w -= hik * basis[i];
      }
    }
    hess(k + 1, k) = w.norm();
    const double happy_tol = 1e-14 * hess.col(k).head(k + 1).norm();
    if (hess(k + 1, k) > happy_tol) {
      basis.push_back(w / hess(k + 1, k));
    } else {
      happy = true;
    }
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
      hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
      hess(i, k) = t;
    }
    const double denom = std::hypot(hess(k, k), hess(k + 1, k));
    cs[k] = denom == 0.0 ? 1.0 : hess(k, k) / denom;
    sn[k] = denom == 0.0 ? 0.0 : hess(k + 1, k) / denom;
    hess(k, k) = denom;
    hess(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    result.residual_history.push_back(std::abs(g[k + 1]));
    if (iterate_callback) {
      // Back-substitute the current least-squares solution and expand it in
      // the stored basis.
      Vec yk = Vec::Zero(k + 1);
      for (int i = k; i >= 0; --i) {
        double s = g[i];
        for (int j = i + 1; j <= k; ++j) s -= hess(i, j) * yk[j];
        yk[i] = hess(i, i) != 0.0 ? s / hess(i, i) : 0.0;
      }
      Vec xk = x;
      for (int i = 0; i <= k; ++i) xk += yk[i] * basis[i];
      iterate_callback(k + 1, xk);
    }
    if (std::abs(g[k + 1]) <= target || happy) {
      ++k;
      result.converged = true;
      break;
    }
  }

  const int used = std::min<int>(k, static_cast<int>(basis.size()));
  Vec y = Vec::Zero(used);
  for (int i = used - 1; i >= 0; --i) {
    double s = g[i];
    for (int j = i + 1; j < used; ++j) s -= hess(i, j) * y[j];
    y[i] = hess(i, i) != 0.0 ? s / hess(i, i) : 0.0;
  }
  for (int i = 0; i < used; ++i) x += y[i] * basis[i];

  result.x = std::move(x);
  result.iterations = k;
  if (happy) result.converged = true;
  return result;
}

}  // namespace mpet
