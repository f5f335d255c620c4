#include "tgmfe/msolve.hpp"

#include <cmath>
#include <sstream>

#include "tgmfe/analysis.hpp"
#include "tgmfe/errors.hpp"

namespace tgmfe {

void validate(const SolverConfig& cfg) {
  if (!(cfg.newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
  if (!(cfg.linear_tol > 0.0)) throw InvalidArgument("linear_tol must be positive");
  if (cfg.newton_max < 1) throw InvalidArgument("newton_max must be >= 1");
  if (cfg.linear_max_iter < 0) throw InvalidArgument("linear_max_iter must be >= 0");
}

std::string to_string(Method m) { return m == Method::Mfe ? "mfe" : "tgmfe"; }

Method parse_method(const std::string& s) {
  if (s == "mfe") return Method::Mfe;
  if (s == "tgmfe") return Method::Tgmfe;
  throw InvalidArgument("method must be 'mfe' or 'tgmfe', got '" + s + "'");
}

StepState StepState::advanced(FeFunction u_next, FeFunction sigma_next) const {
  StepState next(u.space_ptr());
  next.n = n + 1;
  next.u_prev2 = u_prev;
  next.u_prev = u;
  next.sigma_prev = sigma;
  next.u = std::move(u_next);
  next.sigma = std::move(sigma_next);
  return next;
}

int RunReport::newton_total() const {
  int s = 0;
  for (int k : newton_iterations) s += k;
  return s;
}

Discretization::Discretization(SpacePtr space, const ProblemSpec& problem)
    : space_(std::move(space)), problem_(&problem) {
  if (!space_) throw InvalidArgument("Discretization needs a space");
  if (!(space_->mesh().domain() == problem.domain)) throw InvalidArgument("space and problem domains differ");
  mass_ = restrict_to_free(*space_, assemble_mass(*space_));
  stiffness_ = restrict_to_free(*space_, assemble_stiffness(*space_));
  // Coupled unknowns are [u; sigma]; keep each node's pair adjacent.
  const std::size_t nf = space_->num_free();
  std::vector<std::size_t> order;
  order.reserve(2 * nf);
  for (std::size_t k : nested_dissection_order(*space_)) {
    order.push_back(k);
    order.push_back(nf + k);
  }
  solver_.set_ordering(std::move(order));
}

std::vector<double> Discretization::source_load(double t) const {
  for (const auto& [time, load] : load_cache_) {
    if (time == t) return load;
  }
  const auto& g = problem_->g;
  auto load = restrict_to_free(*space_, assemble_load(*space_, qp_values(*space_, [&](const Point& p) { return g(p, t); })));
  if (load_cache_.size() >= 2) load_cache_.erase(load_cache_.begin());
  load_cache_.emplace_back(t, load);
  return load;
}

std::vector<double> Discretization::nonlinear_load(const FeFunction& u) const {
  QpField v = qp_values(u);
  for (double& x : v) x = problem_->f(x);
  return restrict_to_free(*space_, assemble_load(*space_, v));
}

SparseMatrix Discretization::derivative_mass(const QpField& fprime_at_qp) const {
  return restrict_to_free(*space_, assemble_weighted_mass(*space_, fprime_at_qp));
}

namespace {

std::vector<double> free_part(const FeFunction& f) { return restrict_to_free(f.space(), f.coeffs()); }

FeFunction from_free(const SpacePtr& space, std::span<const double> v) {
  return FeFunction(space, extend_from_free(*space, v));
}

void axpy(double a, std::span<const double> x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Factor applied to the sigma row so the coupled matrix is symmetric.
double constraint_row_factor(const StepWeights& w, double gamma) { return -gamma * w.w_new; }

/// [a0 M + w A + w N,  −γ w A ; −γ w A, −γ w M], i.e. the sigma row scaled
/// by constraint_row_factor. Symmetric quasi-definite.
SparseMatrix coupled_matrix(const Discretization& d, const StepWeights& w, double gamma, const SparseMatrix* n) {
  SparseMatrix k00 = add(d.mass(), w.a0, d.stiffness(), w.w_new);
  if (n != nullptr) k00 = add(k00, 1.0, *n, w.w_new);
  const double c = constraint_row_factor(w, gamma);
  const BlockGrid grid{{{Block{&k00, 1.0}, Block{&d.stiffness(), c}},
                        {Block{&d.stiffness(), c}, Block{&d.mass(), c}}}};
  return compose_block(grid);
}

/// Right-hand side of the u-row: everything known from earlier levels.
std::vector<double> history_rhs(const StepState& state, const ThetaScheme& scheme, const Discretization& d,
                                const SolverConfig& cfg, const StepWeights& w, int level) {
  const double gamma = d.problem().gamma;
  const auto u1 = free_part(state.u);
  const auto s1 = free_part(state.sigma);

  std::vector<double> rhs;
  if (cfg.source == SourceSampling::Shifted) {
    rhs = d.source_load(scheme.shifted_time(level));
  } else {
    rhs = d.source_load(scheme.time(level));
    for (double& x : rhs) x *= w.w_new;
    axpy(w.w_old, d.source_load(scheme.time(level - 1)), rhs);
  }

  std::vector<double> hist(u1.size(), 0.0);
  axpy(w.a1, u1, hist);
  if (w.a2 != 0.0) axpy(w.a2, free_part(state.u_prev), hist);
  axpy(-1.0, d.mass() * hist, rhs);

  if (w.w_old != 0.0) {
    axpy(gamma * w.w_old, d.stiffness() * s1, rhs);
    axpy(-w.w_old, d.stiffness() * u1, rhs);
    axpy(-w.w_old, d.nonlinear_load(state.u), rhs);
  }
  return rhs;
}

void record_constraint(const Discretization& d, std::span<const double> u, std::span<const double> s, StepInfo* info) {
  if (info == nullptr) return;
  auto au = d.stiffness() * u;
  const auto ms = d.mass() * s;
  info->constraint_scale = norm2(au);
  for (std::size_t i = 0; i < au.size(); ++i) au[i] += ms[i];
  info->constraint_residual = norm2(au);
}

double mass_norm(const Discretization& d, const FeFunction& f) {
  const auto u = free_part(f);
  const auto mu = d.mass() * u;
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sq += u[i] * mu[i];
  return std::sqrt(std::max(0.0, sq));
}

}  // namespace

StepState init_state(const Discretization& disc, const SolverConfig& cfg) {
  validate(cfg);
  const SpacePtr& space = disc.space_ptr();
  StepState st(space);
  st.u = interpolate(space, disc.problem().u0, true);
  const auto u0 = free_part(st.u);
  auto rhs = disc.stiffness() * u0;
  for (double& x : rhs) x = -x;
  DirectSolver mass_solver;
  mass_solver.factorize(disc.mass());
  const auto s0 = mass_solver.solve(rhs, SolveOptions{cfg.linear_tol, cfg.linear_max_iter});
  st.sigma = from_free(space, s0);
  st.u_prev = st.u;
  st.sigma_prev = st.sigma;
  st.u_prev2 = st.u;
  return st;
}

StepState init_state(const SpacePtr& space, const ProblemSpec& problem, const SolverConfig& cfg) {
  const Discretization disc(space, problem);
  return init_state(disc, cfg);
}

StepState mfe_step(const StepState& state, const ThetaScheme& scheme, const Discretization& disc,
                   const SolverConfig& cfg, StepInfo* info) {
  const int level = state.n + 1;
  if (level > scheme.num_steps()) throw InvalidArgument("stepping past the final time level");
  const StepWeights w = scheme.weights(level);
  const double gamma = disc.problem().gamma;
  const SpacePtr& space = disc.space_ptr();
  const auto& fp = disc.problem().f_prime;
  const std::size_t nf = disc.space().num_free();

  Stopwatch asm_clock;
  const auto rhs1 = history_rhs(state, scheme, disc, cfg, w, level);
  PhaseTime assembly = asm_clock.elapsed();
  PhaseTime solve_time;

  std::vector<double> u = free_part(state.u);
  std::vector<double> s = free_part(state.sigma);
  FeFunction uh = state.u;

  const double scale = std::max(1.0, norm2(rhs1));
  const double requested = cfg.newton_tol * scale;
  double target = requested;

  // Also refreshes `target` with the rounding floor of the current iterate.
  auto residual = [&](std::vector<double>& r) {
    Stopwatch c;
    r.assign(2 * nf, 0.0);
    const auto mu = disc.mass() * u;
    const auto au = disc.stiffness() * u;
    const auto as = disc.stiffness() * s;
    const auto ms = disc.mass() * s;
    const auto fu = disc.nonlinear_load(uh);
    for (std::size_t i = 0; i < nf; ++i) {
      r[i] = w.a0 * mu[i] + w.w_new * au[i] - gamma * w.w_new * as[i] + w.w_new * fu[i] - rhs1[i];
      r[nf + i] = au[i] + ms[i];
    }
    const auto mag_mu = abs_multiply(disc.mass(), u);
    const auto mag_au = abs_multiply(disc.stiffness(), u);
    const auto mag_as = abs_multiply(disc.stiffness(), s);
    const auto mag_ms = abs_multiply(disc.mass(), s);
    std::vector<double> mag(2 * nf);
    for (std::size_t i = 0; i < nf; ++i) {
      mag[i] = w.a0 * mag_mu[i] + w.w_new * mag_au[i] + gamma * w.w_new * mag_as[i] + w.w_new * std::fabs(fu[i]) +
               std::fabs(rhs1[i]);
      mag[nf + i] = mag_au[i] + mag_ms[i];
    }
    target = std::max(requested, roundoff_floor(mag));
    assembly += c.elapsed();
    return norm2(r);
  };

  std::vector<double> r;
  std::vector<double> history{residual(r)};
  bool converged = false;
  int iters = 0;
  // At least one Newton update so that tiny residuals do not freeze the state.
  while (iters < cfg.newton_max) {
    Stopwatch ca;
    QpField d = qp_values(uh);
    for (double& x : d) x = fp(x);
    const SparseMatrix n = disc.derivative_mass(d);
    const SparseMatrix jac = coupled_matrix(disc, w, gamma, &n);
    assembly += ca.elapsed();

    std::vector<double> rs = r;
    for (std::size_t i = nf; i < rs.size(); ++i) rs[i] *= constraint_row_factor(w, gamma);

    Stopwatch cs;
    disc.solver().factorize(jac);
    const auto dx = disc.solver().solve(rs, SolveOptions{cfg.linear_tol, cfg.linear_max_iter});
    solve_time += cs.elapsed();

    for (std::size_t i = 0; i < nf; ++i) {
      u[i] -= dx[i];
      s[i] -= dx[nf + i];
    }
    uh = from_free(space, u);
    ++iters;
    history.push_back(residual(r));
    if (history.back() <= target) {
      converged = true;
      break;
    }
    if (!std::isfinite(history.back())) break;
  }

  if (info != nullptr) {
    info->newton_iterations = iters;
    info->residual_history = history;
    info->assembly = assembly;
    info->solve = solve_time;
  }
  if (!converged) {
    std::ostringstream os;
    os << "Newton did not converge at level " << level << " after " << iters << " iterations (residual "
       << history.back() << ", target " << target << ")";
    throw StepFailure(os.str(), level, std::move(history));
  }
  record_constraint(disc, u, s, info);
  return state.advanced(std::move(uh), from_free(space, s));
}

CoarseTrajectory tg_coarse_run(const Discretization& coarse, const ThetaScheme& scheme, const SolverConfig& cfg) {
  Stopwatch clock;
  CoarseTrajectory traj;
  StepState st = init_state(coarse, cfg);
  traj.u.reserve(static_cast<std::size_t>(scheme.num_steps()) + 1);
  traj.u.push_back(st.u);
  for (int n = 1; n <= scheme.num_steps(); ++n) {
    StepInfo info;
    st = mfe_step(st, scheme, coarse, cfg, &info);
    traj.u.push_back(st.u);
    traj.newton_iterations.push_back(info.newton_iterations);
  }
  traj.time = clock.elapsed();
  return traj;
}

StepState tg_fine_step(const StepState& state, const FeFunction& coarse_u, const CrossMeshMap& coarse_map,
                       const ThetaScheme& scheme, const Discretization& fine, const SolverConfig& cfg,
                       StepInfo* info) {
  const int level = state.n + 1;
  if (level > scheme.num_steps()) throw InvalidArgument("stepping past the final time level");
  const StepWeights w = scheme.weights(level);
  const double gamma = fine.problem().gamma;
  const auto& f = fine.problem().f;
  const auto& fp = fine.problem().f_prime;
  const std::size_t nf = fine.space().num_free();

  Stopwatch ca;
  auto rhs1 = history_rhs(state, scheme, fine, cfg, w, level);
  const QpField uh = coarse_map.evaluate(coarse_u);
  QpField slope(uh.size());
  QpField offset(uh.size());
  for (std::size_t i = 0; i < uh.size(); ++i) {
    slope[i] = fp(uh[i]);
    offset[i] = f(uh[i]) - slope[i] * uh[i];
  }
  const auto lin_load = restrict_to_free(fine.space(), assemble_load(fine.space(), offset));
  axpy(-w.w_new, lin_load, rhs1);
  const SparseMatrix n = fine.derivative_mass(slope);
  const SparseMatrix k = coupled_matrix(fine, w, gamma, &n);
  std::vector<double> rhs(2 * nf, 0.0);
  std::copy(rhs1.begin(), rhs1.end(), rhs.begin());
  const PhaseTime assembly = ca.elapsed();

  Stopwatch cs;
  fine.solver().factorize(k);
  const auto x = fine.solver().solve(rhs, SolveOptions{cfg.linear_tol, cfg.linear_max_iter});
  const PhaseTime solve_time = cs.elapsed();

  const std::span<const double> u(x.data(), nf);
  const std::span<const double> s(x.data() + nf, nf);
  if (info != nullptr) {
    info->newton_iterations = 0;
    info->assembly = assembly;
    info->solve = solve_time;
    info->residual_history = {fine.solver().last_residual()};
  }
  record_constraint(fine, u, s, info);
  return state.advanced(from_free(fine.space_ptr(), u), from_free(fine.space_ptr(), s));
}

RunResult run(const ProblemSpec& problem, const ThetaScheme& scheme, Method method, const SpacePtr& coarse,
              const SpacePtr& fine, const SolverConfig& cfg, const StepObserver& observer) {
  validate(problem);
  validate(cfg);
  if (!fine) throw InvalidArgument("run needs a fine space");
  if (method == Method::Tgmfe && !coarse) throw InvalidArgument("tgmfe requires a coarse space");

  RunReport report;
  report.method = method;
  Stopwatch total;

  CoarseTrajectory traj;
  std::optional<Discretization> coarse_disc;
  if (method == Method::Tgmfe) {
    Stopwatch cc;
    coarse_disc.emplace(coarse, problem);
    try {
      traj = tg_coarse_run(*coarse_disc, scheme, cfg);
    } catch (const StepFailure& e) {
      report.ok = false;
      report.failure = std::string("coarse phase: ") + e.what();
      report.residual_histories.push_back(e.residual_history());
    } catch (const SolverFailure& e) {
      report.ok = false;
      report.failure = std::string("coarse phase: ") + e.what();
    }
    report.coarse_phase = cc.elapsed();
    report.newton_iterations = traj.newton_iterations;
    if (!report.ok) {
      report.total = total.elapsed();
      return RunResult{StepState(fine), std::move(report)};
    }
  }

  Stopwatch fc;
  const Discretization disc(fine, problem);
  std::optional<CrossMeshMap> map;
  if (method == Method::Tgmfe) map.emplace(*fine, coarse);
  StepState state = init_state(disc, cfg);
  report.u_l2_norms.push_back(mass_norm(disc, state.u));
  if (observer) observer(state);

  for (int n = 1; n <= scheme.num_steps(); ++n) {
    StepInfo info;
    try {
      if (method == Method::Mfe) {
        state = mfe_step(state, scheme, disc, cfg, &info);
        report.newton_iterations.push_back(info.newton_iterations);
      } else {
        state = tg_fine_step(state, traj.u[static_cast<std::size_t>(n)], *map, scheme, disc, cfg, &info);
      }
    } catch (const StepFailure& e) {
      report.ok = false;
      report.failure = e.what();
      report.residual_histories.push_back(e.residual_history());
      break;
    } catch (const SolverFailure& e) {
      report.ok = false;
      report.failure = e.what();
      break;
    }
    report.residual_histories.push_back(info.residual_history);
    report.constraint_residuals.push_back(info.constraint_residual);
    report.constraint_scales.push_back(info.constraint_scale);
    report.assembly += info.assembly;
    report.solve += info.solve;
    report.u_l2_norms.push_back(mass_norm(disc, state.u));
    if (observer) observer(state);
  }
  report.fine_phase = fc.elapsed();
  report.total = total.elapsed();

  if (report.ok && problem.has_exact()) {
    const double t = scheme.final_time();
    report.err_u = l2_error(state.u, [&](const Point& p) { return problem.exact_u(p, t); });
    report.err_sigma = l2_error(state.sigma, [&](const Point& p) { return problem.exact_sigma(p, t); });
  }
  return RunResult{std::move(state), std::move(report)};
}

}  // namespace tgmfe
