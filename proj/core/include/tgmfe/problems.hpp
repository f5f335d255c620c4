#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tgmfe/mesh.hpp"

namespace tgmfe {

using SpaceTimeField = std::function<double(const Point&, double)>;

/// Data of u_t + γΔ²u − Δu + f(u) = g with u = Δu = 0 on the boundary.
struct ProblemSpec {
  std::string id = "custom";
  Domain domain{Interval{0.0, 1.0}};
  double final_time = 1.0;
  double gamma = 1.0;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  SpaceTimeField g;
  std::function<double(const Point&)> u0;
  /// Optional manufactured solution and its Laplacian.
  SpaceTimeField exact_u;
  SpaceTimeField exact_sigma;

  int dim() const { return domain.dim(); }
  bool has_exact() const { return static_cast<bool>(exact_u) && static_cast<bool>(exact_sigma); }
};

/// Checks gamma > 0, that all required closures are set, u0 = exact_u(., 0)
/// at random points and exact_sigma = Δ exact_u by central differences.
/// Throws InvalidArgument with the failing check.
void validate(const ProblemSpec& p);

/// 2D, [-1,1]^2, u = e^{-t} sin(2πx₁) sin(2πx₂), f = u³ − u.
ProblemSpec example41(double gamma);
/// 2D, [0,1]^2, g = 0, u₀ = x³(1−x)³y³(1−y)³; no exact solution.
ProblemSpec example42(double gamma);
/// 1D, [-1,1], u = e^{-t} sin(2πx).
ProblemSpec example43(double gamma);

/// Built-in lookup by "example41" | "example42" | "example43".
ProblemSpec make_problem(std::string_view id, double gamma);
const std::vector<std::string>& builtin_problem_ids();

}  // namespace tgmfe
