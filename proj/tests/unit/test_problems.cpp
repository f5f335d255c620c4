#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tgmfe/errors.hpp"
#include "tgmfe/problems.hpp"

using namespace tgmfe;

namespace {

constexpr double kPi = std::numbers::pi;

// u_t + γΔ²u − Δu + f(u) − g by central differences of exact_u.
double pde_residual(const ProblemSpec& p, const Point& z, double t) {
  const double h = 1e-3;
  const double k = 1e-5;
  const auto u = [&](double x, double y, double s) { return p.exact_u({x, y}, s); };
  const double ut = (u(z[0], z[1], t + k) - u(z[0], z[1], t - k)) / (2 * k);
  // Δ by the 5-point (or 3-point) stencil, Δ² by applying it to Δ.
  const auto lap = [&](double x, double y) {
    double l = (u(x + h, y, t) - 2 * u(x, y, t) + u(x - h, y, t)) / (h * h);
    if (p.dim() == 2) l += (u(x, y + h, t) - 2 * u(x, y, t) + u(x, y - h, t)) / (h * h);
    return l;
  };
  double bih = (lap(z[0] + h, z[1]) - 2 * lap(z[0], z[1]) + lap(z[0] - h, z[1])) / (h * h);
  if (p.dim() == 2) bih += (lap(z[0], z[1] + h) - 2 * lap(z[0], z[1]) + lap(z[0], z[1] - h)) / (h * h);
  const double uu = u(z[0], z[1], t);
  return ut + p.gamma * bih - lap(z[0], z[1]) + p.f(uu) - p.g(z, t);
}

void check_residual(const ProblemSpec& p) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> x(-0.95, 0.95), t(0.05, 0.95);
  for (int k = 0; k < 100; ++k) {
    const Point z{x(rng), p.dim() == 2 ? x(rng) : 0.0};
    const double s = t(rng);
    // Scale of the equation: the source at a crest of the solution.
    const Point crest{0.25, p.dim() == 2 ? 0.25 : 0.0};
    const double scale = std::max(1.0, std::fabs(p.g(crest, s)));
    CHECK(std::fabs(pde_residual(p, z, s)) <= 1e-4 * scale);
  }
}

}  // namespace

TEST_CASE("example41 data") {
  const ProblemSpec p = example41(1.0);
  CHECK(p.dim() == 2);
  CHECK(p.domain.axis(0).lower == -1.0);
  CHECK(p.final_time == 1.0);
  const double expect = 8 * kPi * kPi - 2 + 64 * std::pow(kPi, 4) + 1.0;
  CHECK(p.g({0.25, 0.25}, 0.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(p.g({0.25, 0.25}, 0.0) == doctest::Approx(6312.138661384869).epsilon(1e-13));
  CHECK(p.exact_sigma({0.25, 0.25}, 0.0) == doctest::Approx(-8 * kPi * kPi));
  CHECK(p.exact_sigma({0.1, -0.3}, 0.0) ==
        doctest::Approx(-8 * kPi * kPi * std::sin(0.2 * kPi) * std::sin(-0.6 * kPi)));
  CHECK_NOTHROW(validate(p));
  check_residual(p);
  check_residual(example41(0.01));
  check_residual(example41(10.0));
}

TEST_CASE("example42 data") {
  const ProblemSpec p = example42(0.1);
  CHECK(p.domain.axis(0).lower == 0.0);
  CHECK(p.domain.axis(1).upper == 1.0);
  CHECK_FALSE(p.has_exact());
  CHECK(p.u0({0.5, 0.5}) == doctest::Approx(2.44140625e-4).epsilon(1e-15));
  for (double s : {0.0, 0.3, 1.0}) {
    CHECK(p.u0({0.0, s}) == 0.0);
    CHECK(p.u0({1.0, s}) == 0.0);
    CHECK(p.u0({s, 0.0}) == 0.0);
    CHECK(p.u0({s, 1.0}) == 0.0);
    CHECK(p.g({0.3, s}, 0.4) == 0.0);
  }
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("example43 data") {
  const ProblemSpec p = example43(1.0);
  CHECK(p.dim() == 1);
  CHECK(p.f_prime(1.0) == 2.0);
  CHECK(p.u0({0.3, 0.0}) == doctest::Approx(std::sin(0.6 * kPi)));
  CHECK(p.exact_sigma({0.3, 0.0}, 0.5) == doctest::Approx(-4 * kPi * kPi * std::exp(-0.5) * std::sin(0.6 * kPi)));
  check_residual(p);
}

TEST_CASE("problem lookup and validation") {
  for (const auto& id : builtin_problem_ids()) CHECK(make_problem(id, 1.0).id == id);
  CHECK_THROWS_AS(make_problem("example44", 1.0), InvalidArgument);
  CHECK_THROWS_AS(example41(0.0), InvalidArgument);
  CHECK_THROWS_AS(example42(-1.0), InvalidArgument);
  CHECK_THROWS_AS(example43(0.0), InvalidArgument);

  ProblemSpec bad = example43(1.0);
  bad.exact_sigma = [](const Point& x, double t) { return 4 * kPi * kPi * std::exp(-t) * std::sin(2 * kPi * x[0]); };
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  ProblemSpec shifted = example43(1.0);
  shifted.u0 = [](const Point& x) { return std::sin(2 * kPi * x[0]) + 1e-6; };
  CHECK_THROWS_AS(validate(shifted), InvalidArgument);
  ProblemSpec missing = example42(1.0);
  missing.f = nullptr;
  CHECK_THROWS_AS(validate(missing), InvalidArgument);
}
