#pragma once

#include "tgmfe/fespace.hpp"

namespace tgmfe {

/// Quadrature points per axis used for error integrals.
inline constexpr int kErrorQuadrature = 5;

/// sqrt(∫ (fh − ref)²) by element quadrature on fh's mesh.
double l2_error(const FeFunction& fh, const ScalarField& ref, int points_per_axis = kErrorQuadrature);
/// sqrt(∫ |∇fh − ∇ref|²); the gradient field returns (∂x, ∂y).
double h1_seminorm_error(const FeFunction& fh, const std::function<std::array<double, 2>(const Point&)>& grad_ref,
                         int points_per_axis = kErrorQuadrature);
double l2_norm(const FeFunction& fh, int points_per_axis = kErrorQuadrature);

/// log(e_coarse/e_fine) / log(h_coarse/h_fine). Throws InvalidArgument for
/// nonpositive inputs or equal step sizes.
double convergence_order(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// L2 distance to a function on another mesh of the same domain; the
/// reference is located pointwise and the integral uses the quadrature of
/// the test function's (coarser) mesh. Throws InvalidArgument on domain mismatch.
double reference_error(const FeFunction& fh, const FeFunction& ref, int points_per_axis = kErrorQuadrature);

/// One row of a convergence table.
struct ErrorRecord {
  double dt = 0.0;
  double coarse_edge = 0.0;  // 0 for one-grid runs
  double fine_edge = 0.0;
  double theta = 0.0;
  double gamma = 0.0;
  double err_u = 0.0;
  double err_sigma = 0.0;
  double cpu_seconds = 0.0;
};

}  // namespace tgmfe
