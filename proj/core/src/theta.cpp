#include "tgmfe/theta.hpp"

#include <cmath>
#include <sstream>

#include "tgmfe/errors.hpp"

namespace tgmfe {

ThetaScheme::ThetaScheme(double theta, double dt, int num_steps) : theta_(theta), dt_(dt), num_steps_(num_steps) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    std::ostringstream os;
    os << "theta must lie in [0, 1/2], got " << theta;
    throw InvalidArgument(os.str());
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  if (num_steps < 1) throw InvalidArgument("number of time steps must be >= 1");
}

ThetaScheme ThetaScheme::for_final_time(double theta, double dt, double final_time) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("final time must be positive");
  const double ratio = final_time / dt;
  const double n = std::round(ratio);
  if (n < 1.0) throw InvalidArgument("final time is shorter than one time step");
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "final time " << final_time << " is not a whole number of steps of " << dt;
    throw InvalidArgument(os.str());
  }
  return ThetaScheme(theta, dt, static_cast<int>(n));
}

double ThetaScheme::shifted_time(int n) const {
  if (n == 1) return 0.5 * dt_;
  return (n - theta_) * dt_;
}

StepWeights ThetaScheme::multistep_weights() const {
  const double inv = 1.0 / (2.0 * dt_);
  return StepWeights{(3.0 - 2.0 * theta_) * inv, -(4.0 - 4.0 * theta_) * inv, (1.0 - 2.0 * theta_) * inv,
                     1.0 - theta_, theta_};
}

StepWeights ThetaScheme::weights(int n) const {
  if (n < 1) throw InvalidArgument("time level must be >= 1");
  return n == 1 ? startup_residual_form(*this) : multistep_weights();
}

StepWeights startup_residual_form(const ThetaScheme& s) {
  return StepWeights{1.0 / s.dt(), -1.0 / s.dt(), 0.0, 0.5, 0.5};
}

double dt_apply(const ThetaScheme& s, double phi_n, double phi_nm1, double phi_nm2) {
  const double t = s.theta();
  return ((3.0 - 2.0 * t) * phi_n - (4.0 - 4.0 * t) * phi_nm1 + (1.0 - 2.0 * t) * phi_nm2) / (2.0 * s.dt());
}

std::vector<double> dt_apply(const ThetaScheme& s, std::span<const double> phi_n, std::span<const double> phi_nm1,
                             std::span<const double> phi_nm2) {
  if (phi_n.size() != phi_nm1.size() || phi_n.size() != phi_nm2.size()) {
    throw InvalidArgument("dt_apply: vector sizes differ");
  }
  std::vector<double> out(phi_n.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dt_apply(s, phi_n[i], phi_nm1[i], phi_nm2[i]);
  return out;
}

double theta_combine(const ThetaScheme& s, double phi_n, double phi_nm1) {
  return (1.0 - s.theta()) * phi_n + s.theta() * phi_nm1;
}

std::vector<double> theta_combine(const ThetaScheme& s, std::span<const double> phi_n,
                                  std::span<const double> phi_nm1) {
  if (phi_n.size() != phi_nm1.size()) throw InvalidArgument("theta_combine: vector sizes differ");
  std::vector<double> out(phi_n.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = theta_combine(s, phi_n[i], phi_nm1[i]);
  return out;
}

double energy_H(const ThetaScheme& s, double norm_n, double norm_nm1, double norm_diff) {
  const double t = s.theta();
  return (3.0 - 2.0 * t) * norm_n * norm_n - (1.0 - 2.0 * t) * norm_nm1 * norm_nm1 +
         (2.0 - t) * (1.0 - 2.0 * t) * norm_diff * norm_diff;
}

}  // namespace tgmfe
