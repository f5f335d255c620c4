#include "tgmfe/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "tgmfe/errors.hpp"

namespace tgmfe {

void gauss_legendre_1d(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw InvalidArgument("Gauss rule needs at least one point");
  nodes.assign(static_cast<std::size_t>(q), 0.0);
  weights.assign(static_cast<std::size_t>(q), 0.0);
  // Newton on P_q starting from the Chebyshev-like guess; roots are symmetric.
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = q * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(q - 1 - i);
    nodes[lo] = -x;
    nodes[hi] = x;
    weights[lo] = w;
    weights[hi] = w;
  }
  if (q % 2 == 1) nodes[static_cast<std::size_t>(q / 2)] = 0.0;
}

QuadratureRule make_gauss_rule(int dim, int points_per_axis) {
  if (dim != 1 && dim != 2) throw InvalidArgument("quadrature dimension must be 1 or 2");
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre_1d(points_per_axis, x, w);
  QuadratureRule rule;
  rule.dim = dim;
  rule.points_per_axis = points_per_axis;
  if (dim == 1) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      rule.points.push_back({x[i], 0.0});
      rule.weights.push_back(w[i]);
    }
    return rule;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      rule.points.push_back({x[i], x[j]});
      rule.weights.push_back(w[i] * w[j]);
    }
  }
  return rule;
}

}  // namespace tgmfe
