#pragma once

// Measurements behind the time-kernel property tests, shared by the unit
// suite and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>

#include "tgmfe/theta.hpp"

namespace props {

// Largest relative error of dt_apply on phi(t) = c0 + c1 t + c2 t^2 over the
// first `levels` levels, against the exact derivative at t_{n-θ}.
inline double quadratic_exactness(double theta, double dt, double c0, double c1, double c2, int levels = 20) {
  const tgmfe::ThetaScheme s(theta, dt, levels);
  const auto phi = [&](double t) { return c0 + c1 * t + c2 * t * t; };
  double worst = 0.0;
  for (int n = 2; n <= levels; ++n) {
    const double d = tgmfe::dt_apply(s, phi(s.time(n)), phi(s.time(n - 1)), phi(s.time(n - 2)));
    const double exact = c1 + 2.0 * c2 * s.shifted_time(n);
    const double scale =
        std::max({std::fabs(exact), std::fabs(c0), std::fabs(c1), std::fabs(c2) * s.time(levels)});
    worst = std::max(worst, std::fabs(d - exact) / scale);
  }
  return worst;
}

// max_n |dt_apply(e^t) - e^{t_{n-θ}}| over [0, 1].
inline double exp_truncation(double theta, int steps) {
  const double dt = 1.0 / steps;
  const tgmfe::ThetaScheme s(theta, dt, steps);
  double worst = 0.0;
  for (int n = 2; n <= steps; ++n) {
    const double d = tgmfe::dt_apply(s, std::exp(s.time(n)), std::exp(s.time(n - 1)), std::exp(s.time(n - 2)));
    worst = std::max(worst, std::fabs(d - std::exp(s.shifted_time(n))));
  }
  return worst;
}

inline double exp_truncation_order(double theta, int steps) {
  return std::log2(exp_truncation(theta, steps) / exp_truncation(theta, 2 * steps));
}

struct EnergyFuzz {
  int cases = 0;
  int inequality_violations = 0;  // (D_t φ)(φ^{n-θ}) >= (H[φ^n] - H[φ^{n-1}])/(4Δt)
  int lower_bound_violations = 0; // H[φ^n] >= |φ^n|^2 / (1-θ)
  double worst_inequality = 0.0;  // most negative slack, scaled
  double worst_lower_bound = 0.0;
};

// Random scalar triples (φ^{n-2}, φ^{n-1}, φ^n) and random θ in [0, 1/2].
inline EnergyFuzz energy_fuzz(int cases, unsigned seed, double slack = 1e-12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_real_distribution<double> th(0.0, 0.5);
  std::uniform_real_distribution<double> logdt(-4.0, 0.0);
  EnergyFuzz out;
  for (int c = 0; c < cases; ++c) {
    const double theta = th(rng);
    const double dt = std::pow(10.0, logdt(rng));
    const tgmfe::ThetaScheme s(theta, dt, 2);
    const double p2 = val(rng), p1 = val(rng), p0 = val(rng);
    const double lhs = tgmfe::dt_apply(s, p0, p1, p2) * tgmfe::theta_combine(s, p0, p1);
    const double h_n = tgmfe::energy_H(s, std::fabs(p0), std::fabs(p1), std::fabs(p0 - p1));
    const double h_nm1 = tgmfe::energy_H(s, std::fabs(p1), std::fabs(p2), std::fabs(p1 - p2));
    const double rhs = (h_n - h_nm1) / (4.0 * dt);
    const double scale = std::max({1.0, p0 * p0, p1 * p1, p2 * p2}) / dt;
    const double gap = (lhs - rhs) / scale;
    out.worst_inequality = std::min(out.worst_inequality, gap);
    if (gap < -slack) ++out.inequality_violations;

    const double bound = p0 * p0 / (1.0 - theta);
    const double gap2 = (h_n - bound) / std::max({1.0, p0 * p0, p1 * p1});
    out.worst_lower_bound = std::min(out.worst_lower_bound, gap2);
    if (gap2 < -slack) ++out.lower_bound_violations;
    ++out.cases;
  }
  return out;
}

}  // namespace props
