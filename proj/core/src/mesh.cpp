#include "tgmfe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgmfe/errors.hpp"

namespace tgmfe {

namespace {

constexpr double kLocateTol = 1e-12;

void check_interval(const Interval& iv) {
  if (!(iv.lower < iv.upper)) {
    std::ostringstream os;
    os << "domain interval [" << iv.lower << ", " << iv.upper << "] is empty";
    throw InvalidArgument(os.str());
  }
}

double lattice(const Interval& iv, int n, int i) {
  if (i == n) return iv.upper;
  return iv.lower + iv.length() * static_cast<double>(i) / static_cast<double>(n);
}

// Cell index along one axis; coordinates on a cell face go to the lower cell.
int axis_cell(const Interval& iv, int n, double x, Point::value_type& local) {
  const double h = iv.length() / n;
  const double s = (x - iv.lower) / h;
  const double nearest = std::round(s);
  int cell;
  if (std::abs(s - nearest) <= kLocateTol * std::max(1.0, std::abs(s))) {
    cell = static_cast<int>(nearest) - 1;
  } else {
    cell = static_cast<int>(std::floor(s));
  }
  cell = std::clamp(cell, 0, n - 1);
  const double left = lattice(iv, n, cell);
  local = std::clamp(2.0 * (x - left) / h - 1.0, -1.0, 1.0);
  return cell;
}

}  // namespace

Domain::Domain(Interval x) : dim_(1), bounds_{x, Interval{0.0, 1.0}} { check_interval(x); }

Domain::Domain(Interval x, Interval y) : dim_(2), bounds_{x, y} {
  check_interval(x);
  check_interval(y);
}

double Domain::measure() const {
  double m = bounds_[0].length();
  if (dim_ == 2) m *= bounds_[1].length();
  return m;
}

bool Domain::contains(const Point& p, double tol) const {
  for (int a = 0; a < dim_; ++a) {
    const auto& iv = bounds_[static_cast<std::size_t>(a)];
    const double slack = tol * std::max(1.0, std::max(std::abs(iv.lower), std::abs(iv.upper)));
    const double x = p[static_cast<std::size_t>(a)];
    if (x < iv.lower - slack || x > iv.upper + slack) return false;
  }
  return true;
}

Mesh::Mesh(Domain domain, std::array<int, 2> divisions) : domain_(domain) {
  const int d = domain_.dim();
  for (int a = 0; a < d; ++a) {
    if (divisions[static_cast<std::size_t>(a)] < 1) {
      throw InvalidArgument("mesh divisions must be >= 1 on every axis");
    }
  }
  divisions_ = {divisions[0], d == 2 ? divisions[1] : 1};
  for (int a = 0; a < 2; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    edge_[ua] = a < d ? domain_.axis(a).length() / divisions_[ua] : 1.0;
  }

  const int nx = divisions_[0] + 1;
  const int ny = d == 2 ? divisions_[1] + 1 : 1;
  num_elements_ = static_cast<std::size_t>(divisions_[0]) * static_cast<std::size_t>(d == 2 ? divisions_[1] : 1);
  coords_.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  on_boundary_.reserve(coords_.capacity());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Point p{lattice(domain_.axis(0), divisions_[0], i), 0.0};
      bool boundary = (i == 0 || i == nx - 1);
      if (d == 2) {
        p[1] = lattice(domain_.axis(1), divisions_[1], j);
        boundary = boundary || j == 0 || j == ny - 1;
      }
      if (boundary) boundary_.push_back(coords_.size());
      on_boundary_.push_back(boundary ? 1 : 0);
      coords_.push_back(p);
    }
  }
}

double Mesh::diameter() const {
  if (dim() == 1) return edge_[0];
  return std::hypot(edge_[0], edge_[1]);
}

double Mesh::element_measure() const { return dim() == 1 ? edge_[0] : edge_[0] * edge_[1]; }

std::array<std::size_t, 4> Mesh::element_nodes(std::size_t e) const {
  if (dim() == 1) return {e, e + 1, 0, 0};
  const auto nx = static_cast<std::size_t>(divisions_[0]);
  const std::size_t ix = e % nx;
  const std::size_t iy = e / nx;
  const std::size_t ll = iy * (nx + 1) + ix;
  return {ll, ll + 1, ll + nx + 2, ll + nx + 1};
}

Point Mesh::element_origin(std::size_t e) const { return coords_[element_nodes(e)[0]]; }

Point Mesh::map_to_physical(std::size_t e, const Point& local) const {
  const Point o = element_origin(e);
  Point p{o[0] + 0.5 * (local[0] + 1.0) * edge_[0], 0.0};
  if (dim() == 2) p[1] = o[1] + 0.5 * (local[1] + 1.0) * edge_[1];
  return p;
}

Mesh make_uniform_mesh(const Domain& domain, std::array<int, 2> divisions) {
  return Mesh(domain, divisions);
}

Mesh make_uniform_mesh(const Domain& domain, int divisions_per_axis) {
  return Mesh(domain, {divisions_per_axis, divisions_per_axis});
}

Location locate_point(const Mesh& mesh, const Point& p) {
  const Domain& dom = mesh.domain();
  if (!dom.contains(p, kLocateTol)) {
    std::ostringstream os;
    os << "point (" << p[0];
    if (mesh.dim() == 2) os << ", " << p[1];
    os << ") lies outside the mesh domain";
    throw OutOfDomain(os.str());
  }
  Location loc;
  const int ix = axis_cell(dom.axis(0), mesh.divisions(0), p[0], loc.local[0]);
  if (mesh.dim() == 1) {
    loc.element = static_cast<std::size_t>(ix);
    return loc;
  }
  const int iy = axis_cell(dom.axis(1), mesh.divisions(1), p[1], loc.local[1]);
  loc.element = static_cast<std::size_t>(iy) * static_cast<std::size_t>(mesh.divisions(0)) +
                static_cast<std::size_t>(ix);
  return loc;
}

}  // namespace tgmfe
