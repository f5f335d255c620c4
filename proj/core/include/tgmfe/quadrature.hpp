#pragma once

#include <vector>

#include "tgmfe/mesh.hpp"

namespace tgmfe {

/// Tensor-product Gauss-Legendre rule on the reference element [-1,1]^dim.
struct QuadratureRule {
  int dim = 1;
  int points_per_axis = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// q-point Gauss-Legendre nodes and weights on [-1,1], ascending.
void gauss_legendre_1d(int q, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact for per-axis polynomial degree <= 2q-1. Throws InvalidArgument for q < 1.
QuadratureRule make_gauss_rule(int dim, int points_per_axis);

}  // namespace tgmfe
