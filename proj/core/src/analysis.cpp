#include "tgmfe/analysis.hpp"

#include <cmath>

#include "tgmfe/errors.hpp"

namespace tgmfe {

namespace {

template <typename Integrand>
double integrate_over(const FeSpace& space, int points_per_axis, Integrand&& fn) {
  const QuadratureRule rule = make_gauss_rule(space.dim(), points_per_axis);
  const Mesh& m = space.mesh();
  const double jac = m.element_measure() / (m.dim() == 1 ? 2.0 : 4.0);
  double total = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    double part = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) part += rule.weights[q] * fn(e, rule.points[q]);
    total += part * jac;
  }
  return total;
}

}  // namespace

double l2_error(const FeFunction& fh, const ScalarField& ref, int points_per_axis) {
  const FeSpace& s = fh.space();
  const double sq = integrate_over(s, points_per_axis, [&](std::size_t e, const Point& xi) {
    const double d = eval_local(fh, e, xi) - ref(s.mesh().map_to_physical(e, xi));
    return d * d;
  });
  return std::sqrt(sq);
}

double h1_seminorm_error(const FeFunction& fh, const std::function<std::array<double, 2>(const Point&)>& grad_ref,
                         int points_per_axis) {
  const FeSpace& s = fh.space();
  const auto c = fh.coeffs();
  const double sq = integrate_over(s, points_per_axis, [&](std::size_t e, const Point& xi) {
    const auto nodes = s.mesh().element_nodes(e);
    std::array<double, 2> g{0.0, 0.0};
    for (int a = 0; a < s.dofs_per_element(); ++a) {
      const auto ga = s.basis_gradient(a, xi);
      g[0] += c[nodes[static_cast<std::size_t>(a)]] * ga[0];
      g[1] += c[nodes[static_cast<std::size_t>(a)]] * ga[1];
    }
    const auto r = grad_ref(s.mesh().map_to_physical(e, xi));
    const double dx = g[0] - r[0];
    const double dy = s.dim() == 2 ? g[1] - r[1] : 0.0;
    return dx * dx + dy * dy;
  });
  return std::sqrt(sq);
}

double l2_norm(const FeFunction& fh, int points_per_axis) {
  return l2_error(fh, [](const Point&) { return 0.0; }, points_per_axis);
}

double convergence_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (!(e_coarse > 0.0 && e_fine > 0.0 && h_coarse > 0.0 && h_fine > 0.0)) {
    throw InvalidArgument("convergence_order needs positive errors and step sizes");
  }
  if (h_coarse == h_fine) throw InvalidArgument("convergence_order needs distinct step sizes");
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

double reference_error(const FeFunction& fh, const FeFunction& ref, int points_per_axis) {
  if (!(fh.space().mesh().domain() == ref.space().mesh().domain())) {
    throw InvalidArgument("reference solution lives on a different domain");
  }
  const Mesh& a = fh.space().mesh();
  const Mesh& b = ref.space().mesh();
  if (a.divisions(0) == b.divisions(0) && (a.dim() == 1 || a.divisions(1) == b.divisions(1))) {
    // Same lattice: evaluate both on the same element without point location.
    const double sq = integrate_over(fh.space(), points_per_axis, [&](std::size_t e, const Point& xi) {
      const double d = eval_local(fh, e, xi) - eval_local(ref, e, xi);
      return d * d;
    });
    return std::sqrt(sq);
  }
  return l2_error(fh, [&ref](const Point& p) { return eval(ref, p); }, points_per_axis);
}

}  // namespace tgmfe
