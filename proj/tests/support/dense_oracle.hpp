#pragma once

// Brute-force reference for the 1D mixed scheme: dense matrices built from
// closed-form element integrals, a plain Gauss elimination, and a damped
// fixed-point loop for the nonlinear levels. Shares no code with the library
// apart from the problem closures.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

struct Problem1d {
  double a = -1.0;
  double b = 1.0;
  double gamma = 1.0;
  std::function<double(double)> f;
  std::function<double(double)> fp;
  std::function<double(double, double)> g;  // g(x, t)
  std::function<double(double)> u0;
};

inline Mat zeros(std::size_t n) { return Mat(n, Vec(n, 0.0)); }

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Gauss elimination with partial pivoting.
inline Vec gauss_solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    if (a[p][k] == 0.0) throw std::runtime_error("singular oracle matrix");
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
      b[i] -= m * b[k];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline Mat inverse(const Mat& a) {
  const std::size_t n = a.size();
  Mat inv = zeros(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    const Vec col = gauss_solve(a, e);
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
  }
  return inv;
}

// Uniform P1 mesh with `ne` elements; unknowns are the ne-1 interior nodes.
struct Grid {
  double a, h;
  int ne;

  Grid(double lo, double hi, int elements) : a(lo), h((hi - lo) / elements), ne(elements) {}
  std::size_t nfree() const { return static_cast<std::size_t>(ne - 1); }
  double node(int i) const { return a + h * i; }

  // Hat function of interior node k (global node k+1) at x.
  double hat(std::size_t k, double x) const {
    const double c = node(static_cast<int>(k) + 1);
    const double r = 1.0 - std::fabs(x - c) / h;
    return r > 0.0 ? r : 0.0;
  }

  // Piecewise linear function with interior values `v` and zero ends.
  double value(const Vec& v, double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * hat(k, x);
    return s;
  }

  Mat mass() const {
    Mat m = zeros(nfree());
    for (std::size_t i = 0; i < nfree(); ++i) {
      m[i][i] = 4.0 * h / 6.0;
      if (i + 1 < nfree()) m[i][i + 1] = m[i + 1][i] = h / 6.0;
    }
    return m;
  }

  Mat stiffness() const {
    Mat k = zeros(nfree());
    for (std::size_t i = 0; i < nfree(); ++i) {
      k[i][i] = 2.0 / h;
      if (i + 1 < nfree()) k[i][i + 1] = k[i + 1][i] = -1.0 / h;
    }
    return k;
  }

  // (fn, phi_i) and (w phi_j, phi_i) by 4-point Gauss per element; exact for
  // integrands up to degree 7.
  template <class F>
  void for_each_qp(F&& body) const {
    static const double xg[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double wg[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};
    for (int e = 0; e < ne; ++e) {
      const double xl = node(e);
      for (int q = 0; q < 4; ++q) body(xl + 0.5 * h * (1.0 + xg[q]), 0.5 * h * wg[q]);
    }
  }

  Vec load(const std::function<double(double)>& fn) const {
    Vec b(nfree(), 0.0);
    for_each_qp([&](double x, double w) {
      const double v = fn(x);
      for (std::size_t i = 0; i < nfree(); ++i) b[i] += w * v * hat(i, x);
    });
    return b;
  }

  Mat weighted_mass(const std::function<double(double)>& wt) const {
    Mat m = zeros(nfree());
    for_each_qp([&](double x, double w) {
      const double v = wt(x);
      for (std::size_t i = 0; i < nfree(); ++i)
        for (std::size_t j = 0; j < nfree(); ++j) m[i][j] += w * v * hat(i, x) * hat(j, x);
    });
    return m;
  }
};

struct Coefficients {
  double a0, a1, a2, wn, wo;
};

inline Coefficients level_coefficients(double theta, double dt, int n) {
  if (n == 1) return {1.0 / dt, -1.0 / dt, 0.0, 0.5, 0.5};
  return {(3.0 - 2.0 * theta) / (2.0 * dt), -(4.0 - 4.0 * theta) / (2.0 * dt), (1.0 - 2.0 * theta) / (2.0 * dt),
          1.0 - theta, theta};
}

struct Level {
  Vec u, s;
};

// Trajectory U^0..U^N, S^0..S^N on `grid`.
struct Trajectory {
  std::vector<Level> levels;
};

inline Level initial_level(const Grid& grid, const Problem1d& p) {
  Level l;
  l.u.resize(grid.nfree());
  for (std::size_t k = 0; k < grid.nfree(); ++k) l.u[k] = p.u0(grid.node(static_cast<int>(k) + 1));
  Vec rhs = matvec(grid.stiffness(), l.u);
  for (double& x : rhs) x = -x;
  l.s = gauss_solve(grid.mass(), rhs);
  return l;
}

// Known part of the u-row at level n, i.e. everything but the terms in U^n.
inline Vec history(const Grid& grid, const Problem1d& p, const Coefficients& c, const std::vector<Level>& lv,
                   int n, double dt) {
  const Mat m = grid.mass();
  const Mat k = grid.stiffness();
  const Level& l1 = lv[static_cast<std::size_t>(n - 1)];
  const double t = n * dt;
  const double tp = (n - 1) * dt;
  Vec rhs(grid.nfree(), 0.0);
  const Vec gn = grid.load([&](double x) { return p.g(x, t); });
  const Vec go = grid.load([&](double x) { return p.g(x, tp); });
  const Vec mu1 = matvec(m, l1.u);
  const Vec ks1 = matvec(k, l1.s);
  const Vec ku1 = matvec(k, l1.u);
  const Vec f1 = grid.load([&](double x) { return p.f(grid.value(l1.u, x)); });
  Vec mu2(grid.nfree(), 0.0);
  if (n >= 2) mu2 = matvec(m, lv[static_cast<std::size_t>(n - 2)].u);
  for (std::size_t i = 0; i < grid.nfree(); ++i) {
    rhs[i] = c.wn * gn[i] + c.wo * go[i] - c.a1 * mu1[i] - c.a2 * mu2[i] + p.gamma * c.wo * ks1[i] -
             c.wo * ku1[i] - c.wo * f1[i];
  }
  return rhs;
}

// Eliminating S^n = -M^{-1} A U^n turns the pair of rows into
//   K U^n + wn (f(U^n), phi) = history,  K = a0 M + wn A + gamma wn A M^{-1} A.
inline Mat reduced_operator(const Grid& grid, const Problem1d& p, const Coefficients& c) {
  const Mat m = grid.mass();
  const Mat k = grid.stiffness();
  const Mat kmk = matmul(k, matmul(inverse(m), k));
  Mat op = zeros(grid.nfree());
  for (std::size_t i = 0; i < grid.nfree(); ++i)
    for (std::size_t j = 0; j < grid.nfree(); ++j)
      op[i][j] = c.a0 * m[i][j] + c.wn * k[i][j] + p.gamma * c.wn * kmk[i][j];
  return op;
}

inline Vec sigma_of(const Grid& grid, const Vec& u) {
  Vec rhs = matvec(grid.stiffness(), u);
  for (double& x : rhs) x = -x;
  return gauss_solve(grid.mass(), rhs);
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// Nonlinear levels by the damped iteration K U_{k+1} = h - wn F(U_k).
inline Trajectory nonlinear_run(const Grid& grid, const Problem1d& p, double theta, double dt, int steps,
                                double damping = 0.7, double tol = 1e-13) {
  Trajectory tr;
  tr.levels.push_back(initial_level(grid, p));
  for (int n = 1; n <= steps; ++n) {
    const Coefficients c = level_coefficients(theta, dt, n);
    const Vec h = history(grid, p, c, tr.levels, n, dt);
    const Mat op = reduced_operator(grid, p, c);
    Vec u = tr.levels.back().u;
    for (int it = 0; it < 10000; ++it) {
      const Vec fu = grid.load([&](double x) { return p.f(grid.value(u, x)); });
      Vec rhs = h;
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= c.wn * fu[i];
      const Vec next = gauss_solve(op, rhs);
      Vec relaxed(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) relaxed[i] = (1.0 - damping) * u[i] + damping * next[i];
      const double change = max_abs_diff(relaxed, u);
      u = relaxed;
      if (change < tol) break;
    }
    tr.levels.push_back({u, sigma_of(grid, u)});
  }
  return tr;
}

// Linearized fine levels: f(U^n) replaced by f(u_H) + f'(u_H)(U^n - u_H),
// with u_H the coarse trajectory's value at the same level.
inline Trajectory two_grid_run(const Grid& fine, const Grid& coarse, const Problem1d& p, double theta, double dt,
                               int steps) {
  const Trajectory ct = nonlinear_run(coarse, p, theta, dt, steps);
  Trajectory tr;
  tr.levels.push_back(initial_level(fine, p));
  for (int n = 1; n <= steps; ++n) {
    const Coefficients c = level_coefficients(theta, dt, n);
    const Vec& uh_coarse = ct.levels[static_cast<std::size_t>(n)].u;
    const auto uH = [&](double x) { return coarse.value(uh_coarse, x); };
    Vec rhs = history(fine, p, c, tr.levels, n, dt);
    const Vec offset = fine.load([&](double x) { return p.f(uH(x)) - p.fp(uH(x)) * uH(x); });
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= c.wn * offset[i];
    Mat op = reduced_operator(fine, p, c);
    const Mat nm = fine.weighted_mass([&](double x) { return p.fp(uH(x)); });
    for (std::size_t i = 0; i < op.size(); ++i)
      for (std::size_t j = 0; j < op.size(); ++j) op[i][j] += c.wn * nm[i][j];
    const Vec u = gauss_solve(op, rhs);
    tr.levels.push_back({u, sigma_of(fine, u)});
  }
  return tr;
}

}  // namespace oracle
