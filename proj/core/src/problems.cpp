#include "tgmfe/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "tgmfe/errors.hpp"

namespace tgmfe {

namespace {

constexpr double kPi = std::numbers::pi;

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream os;
    os << "gamma must be positive, got " << gamma;
    throw InvalidArgument(os.str());
  }
}

double efk(double u) { return u * u * u - u; }
double efk_prime(double u) { return 3.0 * u * u - 1.0; }

Point random_point(const Domain& d, std::mt19937_64& rng) {
  Point p{0.0, 0.0};
  for (int a = 0; a < d.dim(); ++a) {
    std::uniform_real_distribution<double> dist(d.axis(a).lower, d.axis(a).upper);
    p[static_cast<std::size_t>(a)] = dist(rng);
  }
  return p;
}

}  // namespace

void validate(const ProblemSpec& p) {
  require_gamma(p.gamma);
  if (!p.f || !p.f_prime || !p.g || !p.u0) throw InvalidArgument("problem needs f, f_prime, g and u0");
  if (!(p.final_time > 0.0)) throw InvalidArgument("final time must be positive");
  if (static_cast<bool>(p.exact_u) != static_cast<bool>(p.exact_sigma)) {
    throw InvalidArgument("exact_u and exact_sigma must be given together");
  }
  if (!p.exact_u) return;

  std::mt19937_64 rng(20180122);
  for (int i = 0; i < 100; ++i) {
    const Point x = random_point(p.domain, rng);
    const double a = p.u0(x);
    const double b = p.exact_u(x, 0.0);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) throw InvalidArgument("u0 differs from exact_u at t = 0");
  }

  // Central differences need a margin inside the domain.
  const double step = 1e-4;
  std::uniform_real_distribution<double> tdist(0.0, p.final_time);
  for (int i = 0; i < 100; ++i) {
    Point x = random_point(p.domain, rng);
    for (int a = 0; a < p.dim(); ++a) {
      const auto& iv = p.domain.axis(a);
      const auto ua = static_cast<std::size_t>(a);
      x[ua] = std::clamp(x[ua], iv.lower + 2 * step, iv.upper - 2 * step);
    }
    const double t = tdist(rng);
    double lap = 0.0;
    double scale = 0.0;
    const double c = p.exact_u(x, t);
    for (int a = 0; a < p.dim(); ++a) {
      Point xp = x;
      Point xm = x;
      xp[static_cast<std::size_t>(a)] += step;
      xm[static_cast<std::size_t>(a)] -= step;
      const double up = p.exact_u(xp, t);
      const double um = p.exact_u(xm, t);
      lap += (up - 2.0 * c + um) / (step * step);
      scale += (std::abs(up) + 2.0 * std::abs(c) + std::abs(um)) / (step * step);
    }
    const double sigma = p.exact_sigma(x, t);
    // Relative 1e-6, plus the stencil's rounding floor.
    const double tol = 1e-6 * std::abs(sigma) + 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (std::abs(sigma - lap) > tol) {
      std::ostringstream os;
      os << "exact_sigma is not the Laplacian of exact_u at t = " << t << " (" << sigma << " vs " << lap << ")";
      throw InvalidArgument(os.str());
    }
  }
}

ProblemSpec example41(double gamma) {
  require_gamma(gamma);
  ProblemSpec p;
  p.id = "example41";
  p.domain = Domain(Interval{-1.0, 1.0}, Interval{-1.0, 1.0});
  p.final_time = 1.0;
  p.gamma = gamma;
  p.f = efk;
  p.f_prime = efk_prime;
  const double amp = 8.0 * kPi * kPi - 2.0 + 64.0 * gamma * std::pow(kPi, 4);
  p.g = [amp](const Point& x, double t) {
    const double s = std::sin(2.0 * kPi * x[0]) * std::sin(2.0 * kPi * x[1]);
    return amp * std::exp(-t) * s + std::exp(-3.0 * t) * s * s * s;
  };
  p.u0 = [](const Point& x) { return std::sin(2.0 * kPi * x[0]) * std::sin(2.0 * kPi * x[1]); };
  p.exact_u = [](const Point& x, double t) {
    return std::exp(-t) * std::sin(2.0 * kPi * x[0]) * std::sin(2.0 * kPi * x[1]);
  };
  p.exact_sigma = [](const Point& x, double t) {
    return -8.0 * kPi * kPi * std::exp(-t) * std::sin(2.0 * kPi * x[0]) * std::sin(2.0 * kPi * x[1]);
  };
  return p;
}

ProblemSpec example42(double gamma) {
  require_gamma(gamma);
  ProblemSpec p;
  p.id = "example42";
  p.domain = Domain(Interval{0.0, 1.0}, Interval{0.0, 1.0});
  p.final_time = 1.0;
  p.gamma = gamma;
  p.f = efk;
  p.f_prime = efk_prime;
  p.g = [](const Point&, double) { return 0.0; };
  p.u0 = [](const Point& x) {
    const double a = x[0] * (1.0 - x[0]);
    const double b = x[1] * (1.0 - x[1]);
    return a * a * a * b * b * b;
  };
  return p;
}

ProblemSpec example43(double gamma) {
  require_gamma(gamma);
  ProblemSpec p;
  p.id = "example43";
  p.domain = Domain(Interval{-1.0, 1.0});
  p.final_time = 1.0;
  p.gamma = gamma;
  p.f = efk;
  p.f_prime = efk_prime;
  const double amp = 4.0 * kPi * kPi - 2.0 + 16.0 * gamma * std::pow(kPi, 4);
  p.g = [amp](const Point& x, double t) {
    const double s = std::sin(2.0 * kPi * x[0]);
    return amp * std::exp(-t) * s + std::exp(-3.0 * t) * s * s * s;
  };
  p.u0 = [](const Point& x) { return std::sin(2.0 * kPi * x[0]); };
  p.exact_u = [](const Point& x, double t) { return std::exp(-t) * std::sin(2.0 * kPi * x[0]); };
  p.exact_sigma = [](const Point& x, double t) {
    return -4.0 * kPi * kPi * std::exp(-t) * std::sin(2.0 * kPi * x[0]);
  };
  return p;
}

ProblemSpec make_problem(std::string_view id, double gamma) {
  if (id == "example41") return example41(gamma);
  if (id == "example42") return example42(gamma);
  if (id == "example43") return example43(gamma);
  throw InvalidArgument("unknown problem id '" + std::string(id) + "'");
}

const std::vector<std::string>& builtin_problem_ids() {
  static const std::vector<std::string> ids{"example41", "example42", "example43"};
  return ids;
}

}  // namespace tgmfe
