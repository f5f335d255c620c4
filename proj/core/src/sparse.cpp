#include "tgmfe/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include <Eigen/SparseCore>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "tgmfe/errors.hpp"

namespace tgmfe {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw InvalidArgument("triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
  });
  SparseMatrix m(rows, cols);
  m.col_index_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (k < triplets.size() && triplets[k].row == r) {
      const std::size_t c = triplets[k].col;
      double sum = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
        sum += triplets[k].value;
        ++k;
      }
      if (sum != 0.0) {
        m.col_index_.push_back(c);
        m.values_.push_back(sum);
      }
    }
    m.row_ptr_[r + 1] = m.values_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m(n, n);
  m.col_index_.resize(n);
  m.values_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_index_[i] = i;
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

SparseMatrix SparseMatrix::from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                    std::vector<std::size_t> col_index, std::vector<double> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col_index.size() ||
      col_index.size() != values.size()) {
    throw InvalidArgument("inconsistent CSR arrays");
  }
  SparseMatrix m(rows, cols);
  m.col_index_.reserve(values.size());
  m.values_.reserve(values.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_index[k] >= cols || (k > row_ptr[r] && col_index[k] <= col_index[k - 1])) {
        throw InvalidArgument("CSR columns must be in range and strictly increasing");
      }
      if (values[k] != 0.0) {
        m.col_index_.push_back(col_index[k]);
        m.values_.push_back(values[k]);
      }
    }
    m.row_ptr_[r + 1] = m.values_.size();
  }
  return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_index_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw InvalidArgument("matvec size mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_index_[k]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_index_[k], r, values_[k]});
  }
  return from_triplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
         col_index_ == other.col_index_;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d[r * cols_ + col_index_[k]] = values_[k];
  }
  return d;
}

SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("add: shape mismatch");
  std::vector<std::size_t> rp(a.rows() + 1, 0);
  std::vector<std::size_t> ci;
  std::vector<double> v;
  ci.reserve(std::max(a.nnz(), b.nnz()));
  v.reserve(ci.capacity());
  const auto arp = a.row_ptr();
  const auto aci = a.col_index();
  const auto av = a.values();
  const auto brp = b.row_ptr();
  const auto bci = b.col_index();
  const auto bv = b.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::size_t i = arp[r];
    std::size_t j = brp[r];
    while (i < arp[r + 1] || j < brp[r + 1]) {
      std::size_t c;
      double s;
      if (j >= brp[r + 1] || (i < arp[r + 1] && aci[i] < bci[j])) {
        c = aci[i];
        s = alpha * av[i++];
      } else if (i >= arp[r + 1] || bci[j] < aci[i]) {
        c = bci[j];
        s = beta * bv[j++];
      } else {
        c = aci[i];
        s = alpha * av[i++] + beta * bv[j++];
      }
      if (s != 0.0) {
        ci.push_back(c);
        v.push_back(s);
      }
    }
    rp[r + 1] = v.size();
  }
  return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix scaled(const SparseMatrix& a, double alpha) {
  return add(a, alpha, SparseMatrix(a.rows(), a.cols()), 0.0);
}

SparseMatrix compose_block(const BlockGrid& blocks) {
  std::array<std::size_t, 2> row_size{0, 0};
  std::array<std::size_t, 2> col_size{0, 0};
  std::array<bool, 2> row_known{false, false};
  std::array<bool, 2> col_known{false, false};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const Block& b = blocks[i][j];
      if (!b.present()) continue;
      if (row_known[i] && row_size[i] != b.matrix->rows()) throw InvalidArgument("compose_block: row size mismatch");
      if (col_known[j] && col_size[j] != b.matrix->cols()) throw InvalidArgument("compose_block: column size mismatch");
      row_size[i] = b.matrix->rows();
      col_size[j] = b.matrix->cols();
      row_known[i] = col_known[j] = true;
    }
  }
  if (!row_known[0] || !row_known[1] || !col_known[0] || !col_known[1]) {
    throw InvalidArgument("compose_block: every block row and column needs a present block");
  }
  const std::size_t rows = row_size[0] + row_size[1];
  const std::size_t cols = col_size[0] + col_size[1];
  std::vector<std::size_t> rp(rows + 1, 0);
  std::vector<std::size_t> ci;
  std::vector<double> v;
  std::size_t reserve = 0;
  for (const auto& br : blocks) {
    for (const auto& b : br) {
      if (b.present()) reserve += b.matrix->nnz();
    }
  }
  ci.reserve(reserve);
  v.reserve(reserve);
  for (std::size_t bi = 0; bi < 2; ++bi) {
    for (std::size_t r = 0; r < row_size[bi]; ++r) {
      for (std::size_t bj = 0; bj < 2; ++bj) {
        const Block& b = blocks[bi][bj];
        if (!b.present()) continue;
        const std::size_t offset = bj == 0 ? 0 : col_size[0];
        const auto brp = b.matrix->row_ptr();
        const auto bci = b.matrix->col_index();
        const auto bv = b.matrix->values();
        for (std::size_t k = brp[r]; k < brp[r + 1]; ++k) {
          const double val = b.factor * bv[k];
          if (val == 0.0) continue;
          ci.push_back(bci[k] + offset);
          v.push_back(val);
        }
      }
      rp[(bi == 0 ? 0 : row_size[0]) + r + 1] = v.size();
    }
  }
  return SparseMatrix::from_csr(rows, cols, std::move(rp), std::move(ci), std::move(v));
}

std::vector<double> BlockSystem::rhs() const {
  std::vector<double> r(rhs_first);
  r.insert(r.end(), rhs_second.begin(), rhs_second.end());
  return r;
}

std::vector<double> BlockSystem::apply(std::span<const double> x) const {
  std::array<std::size_t, 2> col_size{0, 0};
  std::array<std::size_t, 2> row_size{0, 0};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      if (!blocks[i][j].present()) continue;
      row_size[i] = blocks[i][j].matrix->rows();
      col_size[j] = blocks[i][j].matrix->cols();
    }
  }
  if (x.size() != col_size[0] + col_size[1]) throw InvalidArgument("BlockSystem::apply size mismatch");
  std::vector<double> y(row_size[0] + row_size[1], 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const Block& b = blocks[i][j];
      if (!b.present()) continue;
      const auto xs = x.subspan(j == 0 ? 0 : col_size[0], col_size[j]);
      const std::vector<double> part = (*b.matrix) * xs;
      const std::size_t off = i == 0 ? 0 : row_size[0];
      for (std::size_t k = 0; k < part.size(); ++k) y[off + k] += b.factor * part[k];
    }
  }
  return y;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool is_symmetric(const SparseMatrix& a) {
  if (a.rows() != a.cols()) return false;
  const auto rp = a.row_ptr();
  const auto ci = a.col_index();
  const auto v = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      if (ci[k] > r && a.at(ci[k], r) != v[k]) return false;
      if (ci[k] < r && a.at(ci[k], r) == 0.0) return false;
    }
  }
  return true;
}

std::vector<double> abs_multiply(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw InvalidArgument("matvec size mismatch");
  const auto rp = a.row_ptr();
  const auto ci = a.col_index();
  const auto v = a.values();
  std::vector<double> y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) s += std::fabs(v[k] * x[ci[k]]);
    y[r] = s;
  }
  return y;
}

double roundoff_floor(std::span<const double> magnitudes) {
  return kRoundoffFactor * std::numeric_limits<double>::epsilon() * norm2(magnitudes);
}

struct DirectSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using Permutation = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>;
  enum class Kind { None, Ldlt, Lu };

  Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  Kind kind = Kind::None;
  std::vector<std::size_t> order;
  /// Maps original index i to position perm.indices()[i].
  Permutation perm;

  Eigen::VectorXd apply(const Eigen::VectorXd& b) const {
    if (kind == Kind::Lu) return lu.solve(b);
    const Eigen::VectorXd pb = perm * b;
    const Eigen::VectorXd y = ldlt.solve(pb);
    return perm.transpose() * y;
  }
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::set_ordering(std::vector<std::size_t> order) {
  std::vector<char> seen(order.size(), 0);
  for (std::size_t i : order) {
    if (i >= order.size() || seen[i] != 0) throw InvalidArgument("ordering must be a permutation");
    seen[i] = 1;
  }
  impl_->order = std::move(order);
  impl_->kind = Impl::Kind::None;
}

bool DirectSolver::symmetric_path() const { return impl_->kind == Impl::Kind::Ldlt; }

void DirectSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("solve requires a square matrix");
  const bool symmetric = is_symmetric(a);
  const Impl::Kind want = symmetric ? Impl::Kind::Ldlt : Impl::Kind::Lu;
  const bool reuse = impl_->kind == want && matrix_.same_pattern(a);
  matrix_ = a;

  using RowMap = Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>>;
  const auto n = static_cast<int>(a.rows());
  std::vector<int> rp(a.row_ptr().begin(), a.row_ptr().end());
  std::vector<int> ci(a.col_index().begin(), a.col_index().end());
  const RowMap view(n, n, static_cast<int>(a.nnz()), rp.data(), ci.data(), a.values().data());
  Impl::ColMatrix col = view;
  col.makeCompressed();

  if (symmetric) {
    if (!reuse) {
      if (!impl_->order.empty()) {
        if (impl_->order.size() != a.rows()) throw InvalidArgument("ordering size does not match the matrix");
        Eigen::VectorXi pos(n);
        for (std::size_t k = 0; k < impl_->order.size(); ++k) pos[static_cast<int>(impl_->order[k])] = static_cast<int>(k);
        impl_->perm = Impl::Permutation(pos);
      } else {
        Impl::Permutation inverse;
        Eigen::AMDOrdering<int>()(col.selfadjointView<Eigen::Lower>(), inverse);
        impl_->perm = inverse.inverse();
      }
    }
    Impl::ColMatrix permuted = impl_->perm * col * impl_->perm.transpose();
    permuted.makeCompressed();
    if (!reuse) impl_->ldlt.analyzePattern(permuted);
    impl_->ldlt.factorize(permuted);
    const auto& d = impl_->ldlt.vectorD();
    if (impl_->ldlt.info() == Eigen::Success && d.allFinite() && (d.array() != 0.0).all()) {
      impl_->kind = Impl::Kind::Ldlt;
      return;
    }
  }

  if (!(reuse && impl_->kind == Impl::Kind::Lu)) impl_->lu.analyzePattern(col);
  impl_->lu.factorize(col);
  if (impl_->lu.info() != Eigen::Success) {
    impl_->kind = Impl::Kind::None;
    throw SolverFailure("sparse LU factorization failed: " + impl_->lu.lastErrorMessage(),
                        std::numeric_limits<double>::infinity());
  }
  impl_->kind = Impl::Kind::Lu;
}

std::vector<double> DirectSolver::solve(std::span<const double> b, const SolveOptions& opts) const {
  if (impl_->kind == Impl::Kind::None) throw InvalidArgument("DirectSolver::solve called before factorize");
  if (b.size() != matrix_.rows()) throw InvalidArgument("right-hand side size mismatch");
  if (!(opts.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");

  const auto n = static_cast<Eigen::Index>(b.size());
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  Eigen::VectorXd x = impl_->apply(rhs);
  std::vector<double> xs(x.data(), x.data() + n);
  std::vector<double> r(b.size());

  const double requested = opts.tol * std::max(1.0, norm2(b));
  auto target_for = [&]() {
    auto mag = abs_multiply(matrix_, xs);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += std::fabs(b[i]);
    return std::max(requested, roundoff_floor(mag));
  };
  double target = target_for();
  auto residual = [&]() {
    matrix_.multiply(xs, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };
  double res = residual();
  for (int it = 0; it < opts.max_iter && res > target && std::isfinite(res); ++it) {
    const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), n);
    const Eigen::VectorXd dx = impl_->apply(rv);
    for (Eigen::Index i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] += dx[i];
    res = residual();
    target = target_for();
  }
  last_residual_ = res;
  if (!(res <= target)) {
    std::ostringstream os;
    os << "linear solve residual " << res << " exceeds tolerance " << target;
    throw SolverFailure(os.str(), res);
  }
  return xs;
}

std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, double tol, int max_iter) {
  DirectSolver s;
  s.factorize(a);
  return s.solve(b, SolveOptions{tol, max_iter});
}

}  // namespace tgmfe
