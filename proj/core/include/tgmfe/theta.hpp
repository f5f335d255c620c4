#pragma once

#include <span>
#include <vector>

namespace tgmfe {

/// Coefficients of one time level's discrete equation:
///   D_t phi = a0*phi^n + a1*phi^{n-1} + a2*phi^{n-2},
///   phi^{n-theta} = w_new*phi^n + w_old*phi^{n-1}.
struct StepWeights {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double w_new = 1.0;
  double w_old = 0.0;
};

/// Second-order time discretization at the shifted point t_{n-theta},
/// theta in [0, 1/2]. theta = 1/2 is Crank-Nicolson, theta = 0 is BDF2.
class ThetaScheme {
public:
  /// Throws InvalidArgument unless 0 <= theta <= 1/2, dt > 0, num_steps >= 1.
  ThetaScheme(double theta, double dt, int num_steps);
  /// N = round(T/dt); rejects N = 0 and T that is not a multiple of dt (1e-9 relative).
  static ThetaScheme for_final_time(double theta, double dt, double final_time);

  double theta() const { return theta_; }
  double dt() const { return dt_; }
  int num_steps() const { return num_steps_; }
  double final_time() const { return dt_ * num_steps_; }
  double time(int n) const { return dt_ * n; }
  /// t_{n-theta}; for the startup step this is t_{1/2}.
  double shifted_time(int n) const;

  /// Three-level weights ((3-2θ), -(4-4θ), (1-2θ)) / (2Δt).
  StepWeights multistep_weights() const;
  /// Weights used at level n: the Crank-Nicolson form for n = 1, the
  /// three-level form for n >= 2.
  StepWeights weights(int n) const;

private:
  double theta_;
  double dt_;
  int num_steps_;
};

/// Startup (n = 1) weights: D_t = (phi^1 - phi^0)/dt, values averaged with
/// (1/2, 1/2), independent of the scheme's theta.
StepWeights startup_residual_form(const ThetaScheme& s);

std::vector<double> dt_apply(const ThetaScheme& s, std::span<const double> phi_n, std::span<const double> phi_nm1,
                             std::span<const double> phi_nm2);
double dt_apply(const ThetaScheme& s, double phi_n, double phi_nm1, double phi_nm2);

std::vector<double> theta_combine(const ThetaScheme& s, std::span<const double> phi_n,
                                  std::span<const double> phi_nm1);
double theta_combine(const ThetaScheme& s, double phi_n, double phi_nm1);

/// Discrete energy
///   (3-2θ)|φ^n|² - (1-2θ)|φ^{n-1}|² + (2-θ)(1-2θ)|φ^n - φ^{n-1}|²
/// taking the three norms (not squared) as input.
double energy_H(const ThetaScheme& s, double norm_n, double norm_nm1, double norm_diff);

}  // namespace tgmfe
