#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tgmfe/fespace.hpp"
#include "tgmfe/problems.hpp"
#include "tgmfe/sparse.hpp"
#include "tgmfe/theta.hpp"
#include "tgmfe/timing.hpp"

namespace tgmfe {

/// How the source term enters level n.
enum class SourceSampling {
  /// (1−θ) g(t_n) + θ g(t_{n−1}), the same θ-weighting as every other term.
  ThetaCombined,
  /// g(t_{n−θ}) sampled at the shifted time.
  Shifted,
};

struct SolverConfig {
  double newton_tol = 1e-10;
  int newton_max = 50;
  double linear_tol = 1e-10;
  int linear_max_iter = 5;
  SourceSampling source = SourceSampling::ThetaCombined;
};

/// Throws InvalidArgument unless tolerances are positive and budgets >= 1.
void validate(const SolverConfig& cfg);

enum class Method { Mfe, Tgmfe };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// Solution pair at time level n with the history the next step needs.
struct StepState {
  int n = 0;
  FeFunction u;
  FeFunction sigma;
  FeFunction u_prev;
  FeFunction sigma_prev;
  /// U^{n-2}; only meaningful once n >= 2.
  FeFunction u_prev2;

  explicit StepState(const SpacePtr& space)
      : u(space), sigma(space), u_prev(space), sigma_prev(space), u_prev2(space) {}

  /// Shifts the history one level back and installs the new pair.
  StepState advanced(FeFunction u_next, FeFunction sigma_next) const;
};

/// Per-step diagnostics filled by the steppers.
struct StepInfo {
  int newton_iterations = 0;
  std::vector<double> residual_history;
  double constraint_residual = 0.0;
  /// ‖A U‖ on free rows, the scale of the constraint residual.
  double constraint_scale = 0.0;
  PhaseTime assembly;
  PhaseTime solve;
};

/// Operators of one space, assembled once and reduced to the free nodes,
/// plus a factorization cache for the coupled step matrix.
class Discretization {
public:
  Discretization(SpacePtr space, const ProblemSpec& problem);

  const SpacePtr& space_ptr() const { return space_; }
  const FeSpace& space() const { return *space_; }
  const ProblemSpec& problem() const { return *problem_; }

  /// Reduced mass M and stiffness A.
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }

  /// Free part of (g(t), φ_i). Results for the two most recent times are cached.
  std::vector<double> source_load(double t) const;
  /// Free part of (f(U_h), φ_i).
  std::vector<double> nonlinear_load(const FeFunction& u) const;
  /// Free part of (w f'(U_h) φ_j, φ_i), i.e. the reduced weighted mass.
  SparseMatrix derivative_mass(const QpField& fprime_at_qp) const;

  DirectSolver& solver() const { return solver_; }

private:
  SpacePtr space_;
  const ProblemSpec* problem_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  mutable DirectSolver solver_;
  mutable std::vector<std::pair<double, std::vector<double>>> load_cache_;
};

/// U⁰ = nodal interpolant of u₀ with zero boundary values; S⁰ solves
/// M S⁰ = −A U⁰ on the free nodes.
StepState init_state(const Discretization& disc, const SolverConfig& cfg);
StepState init_state(const SpacePtr& space, const ProblemSpec& problem, const SolverConfig& cfg);

/// One level of the nonlinear scheme: Newton on the coupled residual with
/// the analytic Jacobian. Level 1 uses the Crank-Nicolson startup form.
/// Throws StepFailure if Newton stalls.
StepState mfe_step(const StepState& state, const ThetaScheme& scheme, const Discretization& disc,
                   const SolverConfig& cfg, StepInfo* info = nullptr);

/// Coarse trajectory u_H^0 .. u_H^N from the nonlinear scheme.
struct CoarseTrajectory {
  std::vector<FeFunction> u;
  std::vector<int> newton_iterations;
  PhaseTime time;
};

CoarseTrajectory tg_coarse_run(const Discretization& coarse, const ThetaScheme& scheme, const SolverConfig& cfg);

/// One linear fine-grid solve with f linearized about the coarse value at
/// level n. `coarse_map` evaluates coarse functions at fine quadrature points.
StepState tg_fine_step(const StepState& state, const FeFunction& coarse_u, const CrossMeshMap& coarse_map,
                       const ThetaScheme& scheme, const Discretization& fine, const SolverConfig& cfg,
                       StepInfo* info = nullptr);

struct RunReport {
  Method method = Method::Mfe;
  std::vector<int> newton_iterations;         // fine (mfe) or coarse (tgmfe) per step
  std::vector<double> constraint_residuals;   // per accepted fine step
  std::vector<double> constraint_scales;
  std::vector<double> u_l2_norms;             // ‖U^n‖ for n = 0..N
  std::vector<std::vector<double>> residual_histories;
  PhaseTime coarse_phase;
  PhaseTime fine_phase;
  PhaseTime assembly;
  PhaseTime solve;
  PhaseTime total;
  std::optional<double> err_u;
  std::optional<double> err_sigma;
  bool ok = true;
  std::string failure;

  int newton_total() const;
};

struct RunResult {
  StepState final_state;
  RunReport report;
};

/// Called after every accepted level, including n = 0.
using StepObserver = std::function<void(const StepState&)>;

/// Full time loop. For tgmfe the coarse phase runs first and both phases
/// count toward the reported time. Step failures stop the loop and return
/// the partial report with ok = false.
RunResult run(const ProblemSpec& problem, const ThetaScheme& scheme, Method method, const SpacePtr& coarse,
              const SpacePtr& fine, const SolverConfig& cfg, const StepObserver& observer = {});

}  // namespace tgmfe
