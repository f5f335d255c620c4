#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace tgmfe {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Columns are strictly increasing within a
/// row and no stored entry is exactly zero.
class SparseMatrix {
public:
  SparseMatrix() = default;
  /// All-zero matrix of the given shape.
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Duplicates are summed. The result does not depend on the order of
  /// `triplets`: entries are summed in (row, col, value) order.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  /// Takes already-compressed arrays; validates ordering and drops zeros.
  static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                               std::vector<std::size_t> col_index, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_index() const { return col_index_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero if not stored.
  double at(std::size_t i, std::size_t j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  SparseMatrix transpose() const;
  bool same_pattern(const SparseMatrix& other) const;
  /// Row-major dense copy, for small test problems.
  std::vector<double> to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

/// alpha*a + beta*b. Throws InvalidArgument on shape mismatch.
SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta);
SparseMatrix scaled(const SparseMatrix& a, double alpha);

/// One block of a 2x2 composition. A null matrix or zero factor is absent.
struct Block {
  const SparseMatrix* matrix = nullptr;
  double factor = 1.0;

  bool present() const { return matrix != nullptr && factor != 0.0; }
};

using BlockGrid = std::array<std::array<Block, 2>, 2>;

/// Monolithic [f00*B00 f01*B01; f10*B10 f11*B11]. Block sizes are taken from
/// the present blocks; throws InvalidArgument if they disagree or a block
/// row/col has no present block to size it.
SparseMatrix compose_block(const BlockGrid& blocks);

/// Coupled two-field system with a split right-hand side.
struct BlockSystem {
  BlockGrid blocks;
  std::vector<double> rhs_first;
  std::vector<double> rhs_second;

  SparseMatrix monolithic() const { return compose_block(blocks); }
  std::vector<double> rhs() const;
  /// Blockwise product without forming the monolithic matrix.
  std::vector<double> apply(std::span<const double> x) const;
};

double norm2(std::span<const double> v);

/// |A| |x|, the entrywise magnitude of the terms summed in A x.
std::vector<double> abs_multiply(const SparseMatrix& a, std::span<const double> x);

/// Smallest residual norm double precision can certify for a sum whose term
/// magnitudes are `magnitudes`: kRoundoffFactor * eps * ||magnitudes||.
inline constexpr double kRoundoffFactor = 4.0;
double roundoff_floor(std::span<const double> magnitudes);

struct SolveOptions {
  double tol = 1e-10;
  /// Budget of iterative-refinement sweeps after the direct solve.
  int max_iter = 5;
};

/// Direct solver with symbolic analysis reused while the sparsity pattern
/// stays the same. Symmetric matrices get an LDL^T factorization without
/// pivoting (fine for definite and quasi-definite systems), anything else a
/// pivoted LU. Solutions satisfy ||Ax - b|| <= tol * max(1, ||b||), relaxed
/// to roundoff_floor(|A||x| + |b|) when cancellation puts that bound below
/// what double precision can represent. Otherwise the call throws
/// SolverFailure with the achieved residual.
class DirectSolver {
public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  /// Elimination order for the symmetric path: order[k] is the unknown
  /// eliminated k-th. Without one a minimum-degree order is computed.
  void set_ordering(std::vector<std::size_t> order);

  void factorize(const SparseMatrix& a);
  std::vector<double> solve(std::span<const double> b, const SolveOptions& opts = {}) const;
  /// Residual of the last solve.
  double last_residual() const { return last_residual_; }
  /// True if the current factorization is LDL^T.
  bool symmetric_path() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SparseMatrix matrix_;
  mutable double last_residual_ = 0.0;
};

bool is_symmetric(const SparseMatrix& a);

/// One-shot factor-and-solve with the same contract as DirectSolver.
std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, double tol = 1e-10,
                          int max_iter = 5);

}  // namespace tgmfe
