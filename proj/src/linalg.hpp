#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mpet {

using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

// Compressed-row sparse matrix. Column indices within a row are sorted and
// duplicate-free after construction.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : m_(rows, cols) {}
  explicit SparseMatrix(Storage m) : m_(std::move(m)) { m_.makeCompressed(); }

  static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  std::int64_t nonzeros() const { return m_.nonZeros(); }

  const Storage::StorageIndex* row_offsets() const { return m_.outerIndexPtr(); }
  const Storage::StorageIndex* column_indices() const { return m_.innerIndexPtr(); }
  const double* values() const { return m_.valuePtr(); }

  Vec apply(const Vec& x) const { return m_ * x; }
  Vec apply_transpose(const Vec& x) const { return m_.transpose() * x; }
  SparseMatrix transposed() const { return SparseMatrix(Storage(m_.transpose())); }

  const Storage& eigen() const { return m_; }
  Storage& eigen() { return m_; }

 private:
  Storage m_;
};

// Coordinate-format Matrix Market, 1-based indices.
void write_matrix_market(const SparseMatrix& m, const std::string& path);
SparseMatrix read_matrix_market(const std::string& path);
// Dense vectors use the array format.
void write_matrix_market_vector(const Vec& v, const std::string& path);
Vec read_matrix_market_vector(const std::string& path);

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

// Reusable sparse direct factorization (LDLT for symmetric positive definite
// blocks, LU otherwise). Immutable after construction; solves against
// distinct right-hand sides are safe concurrently.
class Factorization {
 public:
  Vec solve(const Vec& b) const;
  int size() const;

 private:
  friend Factorization factorize(const SparseMatrix&, bool, const std::string&);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

Factorization factorize(const SparseMatrix& a, bool spd_hint, const std::string& label = "matrix");

using LinearOperator = std::function<Vec(const Vec&)>;

struct GmresResult {
  Vec x;
  std::vector<double> residual_history;  // preconditioned residual norms, [0] = initial
  int iterations = 0;
  bool converged = false;
};

// Left-preconditioned GMRES without restarts. Modified Gram-Schmidt with one
// reorthogonalization pass. Stops when the preconditioned residual has been
// reduced by tol_factor from its value at the start vector. The start vector
// is filled with uniform [0,1) draws from the seeded generator unless x0 is
// supplied. iterate_callback, when set, receives the reconstructed iterate
// after every step.
GmresResult gmres(const LinearOperator& apply_op, const LinearOperator& apply_precond, const Vec& b,
                  double tol_factor, int max_iterations, std::uint64_t seed,
                  const Vec* x0 = nullptr,
                  const std::function<void(int, const Vec&)>& iterate_callback = {});

Vec random_vector(int size, std::uint64_t seed);

}  // namespace mpet
