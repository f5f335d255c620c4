#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace tgmfe {

/// Physical point; in 1D only the first coordinate is used.
using Point = std::array<double, 2>;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  double length() const { return upper - lower; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned interval (dim = 1) or rectangle (dim = 2).
class Domain {
public:
  Domain(Interval x);
  Domain(Interval x, Interval y);

  int dim() const { return dim_; }
  const Interval& axis(int a) const { return bounds_[static_cast<std::size_t>(a)]; }
  double measure() const;
  bool contains(const Point& p, double tol = 1e-12) const;

  friend bool operator==(const Domain&, const Domain&) = default;

private:
  int dim_;
  std::array<Interval, 2> bounds_{};
};

/// Result of point location: element index and reference coordinates in [-1,1]^dim.
struct Location {
  std::size_t element = 0;
  Point local{0.0, 0.0};
};

/// Uniform tensor-product mesh. Nodes are numbered lexicographically with x
/// fastest; 2D elements list their nodes counter-clockwise starting at the
/// lower-left corner, 1D elements list (left, right).
class Mesh {
public:
  Mesh(Domain domain, std::array<int, 2> divisions);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int divisions(int axis) const { return divisions_[static_cast<std::size_t>(axis)]; }
  /// Element edge length along an axis ("h hat").
  double edge_length(int axis) const { return edge_[static_cast<std::size_t>(axis)]; }
  /// Element diameter; for square 2D elements this is sqrt(2) times the edge.
  double diameter() const;
  double element_measure() const;

  std::size_t num_nodes() const { return coords_.size(); }
  std::size_t num_elements() const { return num_elements_; }
  int nodes_per_element() const { return dim() == 1 ? 2 : 4; }

  const Point& node(std::size_t i) const { return coords_[i]; }
  /// Global node ids of an element in local order.
  std::array<std::size_t, 4> element_nodes(std::size_t e) const;
  /// Lower-left corner of an element.
  Point element_origin(std::size_t e) const;
  /// Maps reference coordinates of element e to physical space.
  Point map_to_physical(std::size_t e, const Point& local) const;

  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  bool is_boundary(std::size_t node) const { return on_boundary_[node] != 0; }

private:
  Domain domain_;
  std::array<int, 2> divisions_{1, 1};
  std::array<double, 2> edge_{1.0, 1.0};
  std::size_t num_elements_ = 0;
  std::vector<Point> coords_;
  std::vector<std::size_t> boundary_;
  std::vector<char> on_boundary_;
};

/// Throws InvalidArgument if any division count is < 1. Only the first
/// `domain.dim()` entries of `divisions` are read.
Mesh make_uniform_mesh(const Domain& domain, std::array<int, 2> divisions);
Mesh make_uniform_mesh(const Domain& domain, int divisions_per_axis);

/// Finds the element containing p. Points on shared faces resolve to the
/// lowest element index. Throws OutOfDomain for points outside the closure.
Location locate_point(const Mesh& mesh, const Point& p);

}  // namespace tgmfe
