#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "tgmfe/mesh.hpp"
#include "tgmfe/quadrature.hpp"
#include "tgmfe/sparse.hpp"

namespace tgmfe {

/// Piecewise linear on intervals, bilinear on rectangles.
enum class ElementFamily { P1, Q1 };

using ScalarField = std::function<double(const Point&)>;

/// Values of a scalar field at every quadrature point of a space, stored
/// element-major: index = element * rule.size() + q.
using QpField = std::vector<double>;

class FeSpace;
using SpacePtr = std::shared_ptr<const FeSpace>;

/// Conforming nodal space on a uniform mesh with homogeneous Dirichlet
/// constraints on every boundary node.
class FeSpace {
public:
  static constexpr std::size_t kConstrained = std::numeric_limits<std::size_t>::max();

  explicit FeSpace(Mesh mesh, int quadrature_points = 3);

  const Mesh& mesh() const { return mesh_; }
  int dim() const { return mesh_.dim(); }
  ElementFamily family() const { return dim() == 1 ? ElementFamily::P1 : ElementFamily::Q1; }
  int dofs_per_element() const { return mesh_.nodes_per_element(); }
  std::size_t num_nodes() const { return mesh_.num_nodes(); }

  const QuadratureRule& rule() const { return rule_; }
  std::size_t qp_count() const { return mesh_.num_elements() * rule_.size(); }
  /// Physical coordinates of quadrature point q of element e.
  Point qp_point(std::size_t e, std::size_t q) const { return mesh_.map_to_physical(e, rule_.points[q]); }
  /// Quadrature weight times the element Jacobian determinant.
  double qp_weight(std::size_t q) const { return rule_.weights[q] * jacobian_; }
  /// Basis value of local function a at quadrature point q.
  double qp_basis(std::size_t q, int a) const { return basis_at_qp_[q * 4 + static_cast<std::size_t>(a)]; }

  /// Reference basis on [-1,1]^dim; local ordering follows Mesh::element_nodes.
  double basis(int a, const Point& local) const;
  /// Physical gradient of local basis function a.
  std::array<double, 2> basis_gradient(int a, const Point& local) const;

  const std::vector<std::size_t>& free_nodes() const { return free_nodes_; }
  std::size_t num_free() const { return free_nodes_.size(); }
  /// Reduced index of a node, or kConstrained for boundary nodes.
  std::size_t free_index(std::size_t node) const { return free_index_[node]; }
  const std::vector<std::size_t>& constrained_nodes() const { return mesh_.boundary_nodes(); }

  /// CSR layout shared by every full-size matrix assembled on this space,
  /// with the value slot of each (element, a, b) pair.
  const SparseMatrix& pattern() const { return pattern_; }
  std::size_t slot(std::size_t e, int a, int b) const {
    return slots_[e * 16 + static_cast<std::size_t>(a) * 4 + static_cast<std::size_t>(b)];
  }

private:
  Mesh mesh_;
  QuadratureRule rule_;
  double jacobian_ = 1.0;
  std::vector<double> basis_at_qp_;
  std::vector<std::size_t> free_nodes_;
  std::vector<std::size_t> free_index_;
  SparseMatrix pattern_;
  std::vector<std::size_t> slots_;
};

SpacePtr make_space(const Mesh& mesh, int quadrature_points = 3);

/// Coefficients over all mesh nodes; H0^1 members carry exact zeros on the boundary.
class FeFunction {
public:
  explicit FeFunction(SpacePtr space);
  FeFunction(SpacePtr space, std::vector<double> coeffs);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::vector<double>& coeffs() { return coeffs_; }

  double operator()(const Point& p) const;

private:
  SpacePtr space_;
  std::vector<double> coeffs_;
};

/// Piecewise-polynomial value at p. Throws OutOfDomain outside the mesh.
double eval(const FeFunction& f, const Point& p);
double eval_local(const FeFunction& f, std::size_t element, const Point& local);

/// Nodal interpolant; with `zero_boundary` the constrained nodes are set to 0.
FeFunction interpolate(const SpacePtr& space, const ScalarField& fn, bool zero_boundary = false);

/// Field values at the space's own quadrature points.
QpField qp_values(const FeFunction& f);
QpField qp_values(const FeSpace& space, const ScalarField& fn);

/// Evaluates functions from a source space at the quadrature points of a
/// target space on the same domain. Point location is done once.
class CrossMeshMap {
public:
  CrossMeshMap(const FeSpace& target, SpacePtr source);
  QpField evaluate(const FeFunction& source_fn) const;
  const SpacePtr& source() const { return source_; }

private:
  SpacePtr source_;
  std::vector<Location> locations_;
};

SparseMatrix assemble_mass(const FeSpace& space);
SparseMatrix assemble_stiffness(const FeSpace& space);
/// N_ij = sum over quadrature of w * phi_i * phi_j.
SparseMatrix assemble_weighted_mass(const FeSpace& space, const QpField& w);
SparseMatrix assemble_weighted_mass(const FeSpace& space, const ScalarField& w);
/// b_i = sum over quadrature of s * phi_i.
std::vector<double> assemble_load(const FeSpace& space, const QpField& s);
std::vector<double> assemble_load(const FeSpace& space, const ScalarField& s);

/// Symmetric elimination of constrained rows and columns: keeps the free x free block.
SparseMatrix apply_dirichlet(const SparseMatrix& full, std::span<const std::size_t> constrained);
/// Drops constrained entries of a vector.
std::vector<double> apply_dirichlet(std::span<const double> full, std::span<const std::size_t> constrained);

SparseMatrix restrict_to_free(const FeSpace& space, const SparseMatrix& full);
std::vector<double> restrict_to_free(const FeSpace& space, std::span<const double> full);
/// Scatters free values into a full-length vector with zeros on the boundary.
std::vector<double> extend_from_free(const FeSpace& space, std::span<const double> free_values);

/// Free indices in a nested-dissection elimination order of the node
/// lattice: both halves first, then the separator line between them.
std::vector<std::size_t> nested_dissection_order(const FeSpace& space);

}  // namespace tgmfe
