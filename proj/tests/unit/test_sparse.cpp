#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tgmfe/errors.hpp"
#include "tgmfe/sparse.hpp"

using namespace tgmfe;

namespace {

SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (keep(rng)) t.push_back({i, j, u(rng)});
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

// A = B^T B + I for a dense random B.
SparseMatrix random_spd(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::vector<double> b(n * n);
  for (double& x : b) x = g(rng);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += b[k * n + i] * b[k * n + j];
      t.push_back({i, j, s});
    }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

double residual(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  auto r = a * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r);
}

std::vector<double> random_vector(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("triplet assembly") {
  SUBCASE("duplicates are summed and zeros dropped") {
    const auto m = SparseMatrix::from_triplets(2, 3, {{0, 1, 1.0}, {0, 1, 2.0}, {1, 2, 4.0}, {1, 2, -4.0}, {1, 0, 5.0}});
    CHECK(m.nnz() == 2);
    CHECK(m.at(0, 1) == 3.0);
    CHECK(m.at(1, 2) == 0.0);
    CHECK(m.at(1, 0) == 5.0);
  }
  SUBCASE("columns strictly increase within rows") {
    std::mt19937 rng(1);
    const auto m = random_sparse(20, 30, 0.3, rng);
    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = rp[i] + 1; k < rp[i + 1]; ++k) CHECK(ci[k - 1] < ci[k]);
    for (double v : m.values()) CHECK(v != 0.0);
  }
  SUBCASE("insertion order does not matter") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> idx(0, 14);
    std::vector<Triplet> t(400);
    for (auto& x : t) x = {idx(rng), idx(rng), u(rng)};
    const auto ref = SparseMatrix::from_triplets(15, 15, t);
    for (int k = 0; k < 10; ++k) {
      std::shuffle(t.begin(), t.end(), rng);
      CHECK(SparseMatrix::from_triplets(15, 15, t) == ref);
    }
  }
  SUBCASE("matvec matches the triplet sum") {
    std::vector<Triplet> t{{0, 0, 0.1}, {0, 2, 0.2}, {1, 1, -0.3}, {0, 0, 0.4}, {2, 0, 1e-3}};
    const auto m = SparseMatrix::from_triplets(3, 3, t);
    const std::vector<double> x{1.5, -2.0, 3.25};
    std::vector<double> y(3, 0.0);
    for (const auto& e : t) y[e.row] += e.value * x[e.col];
    const auto mx = m * x;
    for (std::size_t i = 0; i < 3; ++i) CHECK(mx[i] == doctest::Approx(y[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidArgument);
}

TEST_CASE("direct solves") {
  SUBCASE("identity") {
    const std::vector<double> b{1.0, -2.0, 3.0, 0.5};
    const auto x = solve(SparseMatrix::identity(4), b);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]));
  }
  SUBCASE("2x2") {
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
    const auto x = solve(a, std::vector<double>{3.0, 3.0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("random SPD meets the residual contract") {
    std::mt19937 rng(4);
    const auto a = random_spd(50, rng);
    const auto b = random_vector(50, rng);
    DirectSolver s;
    s.factorize(a);
    CHECK(s.symmetric_path());
    const auto x = s.solve(b, {1e-10, 5});
    CHECK(residual(a, x, b) <= 1e-10 * std::max(1.0, norm2(b)));
    CHECK(s.last_residual() == doctest::Approx(residual(a, x, b)).epsilon(1e-6));
  }
  SUBCASE("nonsymmetric matrices take the LU path") {
    std::mt19937 rng(5);
    auto a = add(random_sparse(40, 40, 0.1, rng), 1.0, SparseMatrix::identity(40), 8.0);
    REQUIRE_FALSE(is_symmetric(a));
    const auto b = random_vector(40, rng);
    DirectSolver s;
    s.factorize(a);
    CHECK_FALSE(s.symmetric_path());
    const auto x = s.solve(b);
    CHECK(residual(a, x, b) <= 1e-10 * std::max(1.0, norm2(b)));
  }
  SUBCASE("symmetric indefinite with a zero diagonal falls back to LU") {
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    DirectSolver s;
    s.factorize(a);
    CHECK_FALSE(s.symmetric_path());
    const auto x = s.solve(std::vector<double>{2.0, 3.0});
    CHECK(x[0] == doctest::Approx(3.0));
    CHECK(x[1] == doctest::Approx(2.0));
  }
  SUBCASE("quasi-definite saddle system with an ordering") {
    // [[K, B], [B, -C]] with K, C positive definite.
    std::mt19937 rng(6);
    const std::size_t n = 30;
    const auto k = random_spd(n, rng);
    const auto c = random_spd(n, rng);
    const auto b = add(random_sparse(n, n, 0.2, rng), 1.0, random_sparse(n, n, 0.2, rng), 0.0);
    const auto bs = add(b, 0.5, b.transpose(), 0.5);
    const BlockGrid grid{{{Block{&k, 1.0}, Block{&bs, 1.0}}, {Block{&bs, 1.0}, Block{&c, -1.0}}}};
    const auto a = compose_block(grid);
    REQUIRE(is_symmetric(a));
    std::vector<std::size_t> order(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      order[2 * i] = n - 1 - i;
      order[2 * i + 1] = 2 * n - 1 - i;
    }
    DirectSolver s;
    s.set_ordering(order);
    s.factorize(a);
    CHECK(s.symmetric_path());
    const auto rhs = random_vector(2 * n, rng);
    const auto x = s.solve(rhs);
    CHECK(residual(a, x, rhs) <= 1e-10 * std::max(1.0, norm2(rhs)));
  }
  SUBCASE("refactorizing with the same pattern reuses the analysis") {
    std::mt19937 rng(7);
    const auto a = random_spd(20, rng);
    DirectSolver s;
    s.factorize(a);
    const auto a2 = add(a, 1.0, SparseMatrix::identity(20), 3.0);
    s.factorize(a2);
    const auto b = random_vector(20, rng);
    const auto x = s.solve(b);
    CHECK(residual(a2, x, b) <= 1e-10 * std::max(1.0, norm2(b)));
  }
  SUBCASE("solves are deterministic") {
    std::mt19937 rng(8);
    const auto a = random_spd(25, rng);
    const auto b = random_vector(25, rng);
    CHECK(solve(a, b) == solve(a, b));
  }
}

TEST_CASE("solver failures") {
  const auto singular = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(solve(singular, std::vector<double>{1.0, 0.0}), SolverFailure);
  CHECK_THROWS_AS(solve(SparseMatrix(2, 3), std::vector<double>{1.0, 0.0}), InvalidArgument);
  DirectSolver s;
  CHECK_THROWS_AS(s.set_ordering({0, 0, 1}), InvalidArgument);
  CHECK_THROWS(s.solve(std::vector<double>{1.0}));
}

TEST_CASE("block composition") {
  const auto id = SparseMatrix::identity(3);
  SUBCASE("diagonal identities give a larger identity") {
    const BlockGrid g{{{Block{&id, 1.0}, Block{}}, {Block{}, Block{&id, 1.0}}}};
    CHECK(compose_block(g) == SparseMatrix::identity(6));
  }
  SUBCASE("zero factors are structurally absent") {
    const BlockGrid g{{{Block{&id, 1.0}, Block{&id, 0.0}}, {Block{&id, 0.0}, Block{&id, 2.0}}}};
    const auto m = compose_block(g);
    CHECK(m.nnz() == 6);
    CHECK(m.at(0, 3) == 0.0);
  }
  SUBCASE("monolithic and blockwise products agree") {
    std::mt19937 rng(9);
    const auto a = random_sparse(7, 7, 0.4, rng);
    const auto b = random_sparse(7, 5, 0.4, rng);
    const auto c = random_sparse(5, 7, 0.4, rng);
    const auto d = random_sparse(5, 5, 0.4, rng);
    BlockSystem sys;
    sys.blocks = {{{Block{&a, 1.5}, Block{&b, -0.25}}, {Block{&c, 3.0}, Block{&d, 0.75}}}};
    const auto x = random_vector(12, rng);
    const auto y1 = sys.monolithic() * x;
    const auto y2 = sys.apply(x);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::fabs(y1[i] - y2[i]) <= 1e-14);
  }
  SUBCASE("mismatched blocks are rejected") {
    const auto two = SparseMatrix::identity(2);
    const BlockGrid g{{{Block{&id, 1.0}, Block{&two, 1.0}}, {Block{}, Block{&id, 1.0}}}};
    CHECK_THROWS_AS(compose_block(g), InvalidArgument);
    const BlockGrid empty_row{{{Block{}, Block{}}, {Block{}, Block{&id, 1.0}}}};
    CHECK_THROWS_AS(compose_block(empty_row), InvalidArgument);
  }
}

TEST_CASE("rounding floor") {
  const std::vector<double> mag{3.0, 4.0};
  CHECK(roundoff_floor(mag) == doctest::Approx(kRoundoffFactor * 5.0 * 2.220446049250313e-16));
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, -2.0}, {0, 1, 1.0}, {1, 1, 3.0}});
  const auto m = abs_multiply(a, std::vector<double>{1.0, -1.0});
  CHECK(m[0] == 3.0);
  CHECK(m[1] == 3.0);
}
