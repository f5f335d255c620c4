#include "tgmfe/fespace.hpp"

#include <algorithm>
#include <functional>

#include "tgmfe/errors.hpp"

namespace tgmfe {

namespace {

// Reference node signs in local ordering (lower-left, lower-right, upper-right, upper-left).
constexpr std::array<double, 4> kSignX{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kSignY{-1.0, -1.0, 1.0, 1.0};

}  // namespace

FeSpace::FeSpace(Mesh mesh, int quadrature_points)
    : mesh_(std::move(mesh)), rule_(make_gauss_rule(mesh_.dim(), quadrature_points)) {
  jacobian_ = mesh_.element_measure() / (mesh_.dim() == 1 ? 2.0 : 4.0);

  const int nb = dofs_per_element();
  basis_at_qp_.assign(rule_.size() * 4, 0.0);
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    for (int a = 0; a < nb; ++a) basis_at_qp_[q * 4 + static_cast<std::size_t>(a)] = basis(a, rule_.points[q]);
  }

  free_index_.assign(mesh_.num_nodes(), kConstrained);
  for (std::size_t i = 0; i < mesh_.num_nodes(); ++i) {
    if (!mesh_.is_boundary(i)) {
      free_index_[i] = free_nodes_.size();
      free_nodes_.push_back(i);
    }
  }

  std::vector<Triplet> t;
  const auto ne = mesh_.num_elements();
  t.reserve(ne * static_cast<std::size_t>(nb * nb));
  for (std::size_t e = 0; e < ne; ++e) {
    const auto nodes = mesh_.element_nodes(e);
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < nb; ++b) {
        t.push_back({nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)], 1.0});
      }
    }
  }
  pattern_ = SparseMatrix::from_triplets(mesh_.num_nodes(), mesh_.num_nodes(), std::move(t));

  slots_.assign(ne * 16, 0);
  const auto rp = pattern_.row_ptr();
  const auto ci = pattern_.col_index();
  for (std::size_t e = 0; e < ne; ++e) {
    const auto nodes = mesh_.element_nodes(e);
    for (int a = 0; a < nb; ++a) {
      const std::size_t row = nodes[static_cast<std::size_t>(a)];
      for (int b = 0; b < nb; ++b) {
        const auto first = ci.begin() + static_cast<std::ptrdiff_t>(rp[row]);
        const auto last = ci.begin() + static_cast<std::ptrdiff_t>(rp[row + 1]);
        const auto it = std::lower_bound(first, last, nodes[static_cast<std::size_t>(b)]);
        slots_[e * 16 + static_cast<std::size_t>(a) * 4 + static_cast<std::size_t>(b)] =
            static_cast<std::size_t>(it - ci.begin());
      }
    }
  }
}

double FeSpace::basis(int a, const Point& local) const {
  const auto ua = static_cast<std::size_t>(a);
  if (dim() == 1) return 0.5 * (1.0 + kSignX[ua] * local[0]);
  return 0.25 * (1.0 + kSignX[ua] * local[0]) * (1.0 + kSignY[ua] * local[1]);
}

std::array<double, 2> FeSpace::basis_gradient(int a, const Point& local) const {
  const auto ua = static_cast<std::size_t>(a);
  const double sx = 2.0 / mesh_.edge_length(0);
  if (dim() == 1) return {0.5 * kSignX[ua] * sx, 0.0};
  const double sy = 2.0 / mesh_.edge_length(1);
  return {0.25 * kSignX[ua] * (1.0 + kSignY[ua] * local[1]) * sx,
          0.25 * kSignY[ua] * (1.0 + kSignX[ua] * local[0]) * sy};
}

SpacePtr make_space(const Mesh& mesh, int quadrature_points) {
  return std::make_shared<const FeSpace>(mesh, quadrature_points);
}

FeFunction::FeFunction(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw InvalidArgument("FeFunction needs a space");
  coeffs_.assign(space_->num_nodes(), 0.0);
}

FeFunction::FeFunction(SpacePtr space, std::vector<double> coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!space_) throw InvalidArgument("FeFunction needs a space");
  if (coeffs_.size() != space_->num_nodes()) throw InvalidArgument("coefficient count must equal node count");
}

double FeFunction::operator()(const Point& p) const { return eval(*this, p); }

double eval_local(const FeFunction& f, std::size_t element, const Point& local) {
  const FeSpace& s = f.space();
  const auto nodes = s.mesh().element_nodes(element);
  const auto c = f.coeffs();
  double v = 0.0;
  for (int a = 0; a < s.dofs_per_element(); ++a) v += c[nodes[static_cast<std::size_t>(a)]] * s.basis(a, local);
  return v;
}

double eval(const FeFunction& f, const Point& p) {
  const Location loc = locate_point(f.space().mesh(), p);
  return eval_local(f, loc.element, loc.local);
}

FeFunction interpolate(const SpacePtr& space, const ScalarField& fn, bool zero_boundary) {
  FeFunction out(space);
  auto& c = out.coeffs();
  const Mesh& m = space->mesh();
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    c[i] = (zero_boundary && m.is_boundary(i)) ? 0.0 : fn(m.node(i));
  }
  return out;
}

QpField qp_values(const FeFunction& f) {
  const FeSpace& s = f.space();
  const auto nq = s.rule().size();
  const auto c = f.coeffs();
  const int nb = s.dofs_per_element();
  QpField out(s.qp_count());
  for (std::size_t e = 0; e < s.mesh().num_elements(); ++e) {
    const auto nodes = s.mesh().element_nodes(e);
    for (std::size_t q = 0; q < nq; ++q) {
      double v = 0.0;
      for (int a = 0; a < nb; ++a) v += c[nodes[static_cast<std::size_t>(a)]] * s.qp_basis(q, a);
      out[e * nq + q] = v;
    }
  }
  return out;
}

QpField qp_values(const FeSpace& space, const ScalarField& fn) {
  const auto nq = space.rule().size();
  QpField out(space.qp_count());
  for (std::size_t e = 0; e < space.mesh().num_elements(); ++e) {
    for (std::size_t q = 0; q < nq; ++q) out[e * nq + q] = fn(space.qp_point(e, q));
  }
  return out;
}

CrossMeshMap::CrossMeshMap(const FeSpace& target, SpacePtr source) : source_(std::move(source)) {
  if (!source_) throw InvalidArgument("CrossMeshMap needs a source space");
  if (!(target.mesh().domain() == source_->mesh().domain())) {
    throw InvalidArgument("cross-mesh evaluation requires identical domains");
  }
  const auto nq = target.rule().size();
  locations_.reserve(target.qp_count());
  for (std::size_t e = 0; e < target.mesh().num_elements(); ++e) {
    for (std::size_t q = 0; q < nq; ++q) locations_.push_back(locate_point(source_->mesh(), target.qp_point(e, q)));
  }
}

QpField CrossMeshMap::evaluate(const FeFunction& source_fn) const {
  if (&source_fn.space() != source_.get()) throw InvalidArgument("function does not live on the map's source space");
  QpField out(locations_.size());
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    out[i] = eval_local(source_fn, locations_[i].element, locations_[i].local);
  }
  return out;
}

namespace {

enum class Kernel { Mass, Stiffness };

SparseMatrix assemble_constant(const FeSpace& space, Kernel kernel) {
  const int nb = space.dofs_per_element();
  const auto& rule = space.rule();
  std::array<double, 16> ke{};
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = space.qp_weight(q);
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < nb; ++b) {
        double v;
        if (kernel == Kernel::Mass) {
          v = space.qp_basis(q, a) * space.qp_basis(q, b);
        } else {
          const auto ga = space.basis_gradient(a, rule.points[q]);
          const auto gb = space.basis_gradient(b, rule.points[q]);
          v = ga[0] * gb[0] + ga[1] * gb[1];
        }
        ke[static_cast<std::size_t>(a * 4 + b)] += w * v;
      }
    }
  }
  const SparseMatrix& p = space.pattern();
  std::vector<double> values(p.nnz(), 0.0);
  for (std::size_t e = 0; e < space.mesh().num_elements(); ++e) {
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < nb; ++b) values[space.slot(e, a, b)] += ke[static_cast<std::size_t>(a * 4 + b)];
    }
  }
  return SparseMatrix::from_csr(p.rows(), p.cols(), {p.row_ptr().begin(), p.row_ptr().end()},
                                {p.col_index().begin(), p.col_index().end()}, std::move(values));
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& space) { return assemble_constant(space, Kernel::Mass); }

SparseMatrix assemble_stiffness(const FeSpace& space) { return assemble_constant(space, Kernel::Stiffness); }

SparseMatrix assemble_weighted_mass(const FeSpace& space, const QpField& w) {
  if (w.size() != space.qp_count()) throw InvalidArgument("weight field size does not match quadrature points");
  const int nb = space.dofs_per_element();
  const auto nq = space.rule().size();
  const SparseMatrix& p = space.pattern();
  std::vector<double> values(p.nnz(), 0.0);
  for (std::size_t e = 0; e < space.mesh().num_elements(); ++e) {
    std::array<double, 16> ke{};
    for (std::size_t q = 0; q < nq; ++q) {
      const double wq = w[e * nq + q] * space.qp_weight(q);
      for (int a = 0; a < nb; ++a) {
        const double wa = wq * space.qp_basis(q, a);
        for (int b = a; b < nb; ++b) ke[static_cast<std::size_t>(a * 4 + b)] += wa * space.qp_basis(q, b);
      }
    }
    // Mirrored so the result is symmetric to the last bit.
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < a; ++b) ke[static_cast<std::size_t>(a * 4 + b)] = ke[static_cast<std::size_t>(b * 4 + a)];
    }
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < nb; ++b) values[space.slot(e, a, b)] += ke[static_cast<std::size_t>(a * 4 + b)];
    }
  }
  return SparseMatrix::from_csr(p.rows(), p.cols(), {p.row_ptr().begin(), p.row_ptr().end()},
                                {p.col_index().begin(), p.col_index().end()}, std::move(values));
}

SparseMatrix assemble_weighted_mass(const FeSpace& space, const ScalarField& w) {
  return assemble_weighted_mass(space, qp_values(space, w));
}

std::vector<double> assemble_load(const FeSpace& space, const QpField& s) {
  if (s.size() != space.qp_count()) throw InvalidArgument("source field size does not match quadrature points");
  const int nb = space.dofs_per_element();
  const auto nq = space.rule().size();
  std::vector<double> b(space.num_nodes(), 0.0);
  for (std::size_t e = 0; e < space.mesh().num_elements(); ++e) {
    const auto nodes = space.mesh().element_nodes(e);
    std::array<double, 4> be{};
    for (std::size_t q = 0; q < nq; ++q) {
      const double sq = s[e * nq + q] * space.qp_weight(q);
      for (int a = 0; a < nb; ++a) be[static_cast<std::size_t>(a)] += sq * space.qp_basis(q, a);
    }
    for (int a = 0; a < nb; ++a) b[nodes[static_cast<std::size_t>(a)]] += be[static_cast<std::size_t>(a)];
  }
  return b;
}

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& s) {
  return assemble_load(space, qp_values(space, s));
}

namespace {

std::vector<std::size_t> free_map(std::size_t n, std::span<const std::size_t> constrained) {
  std::vector<std::size_t> map(n, 0);
  for (std::size_t c : constrained) {
    if (c >= n) throw InvalidArgument("constrained index out of range");
    map[c] = FeSpace::kConstrained;
  }
  std::size_t k = 0;
  for (auto& m : map) {
    if (m != FeSpace::kConstrained) m = k++;
  }
  return map;
}

SparseMatrix reduce(const SparseMatrix& full, const std::vector<std::size_t>& map, std::size_t nfree) {
  std::vector<std::size_t> rp(nfree + 1, 0);
  std::vector<std::size_t> ci;
  std::vector<double> v;
  ci.reserve(full.nnz());
  v.reserve(full.nnz());
  const auto frp = full.row_ptr();
  const auto fci = full.col_index();
  const auto fv = full.values();
  std::size_t r = 0;
  for (std::size_t i = 0; i < full.rows(); ++i) {
    if (map[i] == FeSpace::kConstrained) continue;
    for (std::size_t k = frp[i]; k < frp[i + 1]; ++k) {
      const std::size_t j = map[fci[k]];
      if (j == FeSpace::kConstrained) continue;
      ci.push_back(j);
      v.push_back(fv[k]);
    }
    rp[++r] = v.size();
  }
  return SparseMatrix::from_csr(nfree, nfree, std::move(rp), std::move(ci), std::move(v));
}

}  // namespace

SparseMatrix apply_dirichlet(const SparseMatrix& full, std::span<const std::size_t> constrained) {
  if (full.rows() != full.cols()) throw InvalidArgument("apply_dirichlet needs a square matrix");
  const auto map = free_map(full.rows(), constrained);
  std::size_t nfree = 0;
  for (auto m : map) nfree += (m != FeSpace::kConstrained);
  return reduce(full, map, nfree);
}

std::vector<double> apply_dirichlet(std::span<const double> full, std::span<const std::size_t> constrained) {
  const auto map = free_map(full.size(), constrained);
  std::vector<double> out;
  out.reserve(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (map[i] != FeSpace::kConstrained) out.push_back(full[i]);
  }
  return out;
}

SparseMatrix restrict_to_free(const FeSpace& space, const SparseMatrix& full) {
  if (full.rows() != space.num_nodes() || full.cols() != space.num_nodes()) {
    throw InvalidArgument("matrix is not sized to the space's node count");
  }
  std::vector<std::size_t> map(space.num_nodes());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = space.free_index(i);
  return reduce(full, map, space.num_free());
}

std::vector<double> restrict_to_free(const FeSpace& space, std::span<const double> full) {
  if (full.size() != space.num_nodes()) throw InvalidArgument("vector is not sized to the space's node count");
  std::vector<double> out(space.num_free());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = full[space.free_nodes()[k]];
  return out;
}

std::vector<double> extend_from_free(const FeSpace& space, std::span<const double> free_values) {
  if (free_values.size() != space.num_free()) throw InvalidArgument("free vector size mismatch");
  std::vector<double> out(space.num_nodes(), 0.0);
  for (std::size_t k = 0; k < free_values.size(); ++k) out[space.free_nodes()[k]] = free_values[k];
  return out;
}

std::vector<std::size_t> nested_dissection_order(const FeSpace& space) {
  std::vector<std::size_t> order;
  order.reserve(space.num_free());
  const Mesh& mesh = space.mesh();
  if (mesh.dim() == 1) {
    // A banded path graph has no fill in natural order.
    for (std::size_t k = 0; k < space.num_free(); ++k) order.push_back(k);
    return order;
  }
  const int nx = mesh.divisions(0) + 1;
  const int ny = mesh.divisions(1) + 1;
  constexpr int kLeaf = 8;

  auto emit = [&](int i, int j) {
    const std::size_t idx = space.free_index(static_cast<std::size_t>(i + j * nx));
    if (idx != FeSpace::kConstrained) order.push_back(idx);
  };
  std::function<void(int, int, int, int)> split = [&](int i0, int i1, int j0, int j1) {
    const int wi = i1 - i0;
    const int wj = j1 - j0;
    if (wi <= 0 || wj <= 0) return;
    if (wi * wj <= kLeaf) {
      for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) emit(i, j);
      }
      return;
    }
    if (wi >= wj) {
      const int s = i0 + wi / 2;
      split(i0, s, j0, j1);
      split(s + 1, i1, j0, j1);
      for (int j = j0; j < j1; ++j) emit(s, j);
    } else {
      const int s = j0 + wj / 2;
      split(i0, i1, j0, s);
      split(i0, i1, s + 1, j1);
      for (int i = i0; i < i1; ++i) emit(i, s);
    }
  };
  split(1, nx - 1, 1, ny - 1);
  if (order.size() != space.num_free()) throw InvalidArgument("nested dissection missed free nodes");
  return order;
}

}  // namespace tgmfe
