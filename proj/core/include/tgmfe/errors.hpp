#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tgmfe {

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a point lies outside the closed domain (beyond 1e-12).
class OutOfDomain : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Linear solve did not meet its residual contract.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Newton did not converge within its iteration budget.
class StepFailure : public std::runtime_error {
public:
  StepFailure(const std::string& what, int step, std::vector<double> history)
      : std::runtime_error(what), step_(step), history_(std::move(history)) {}
  int step() const noexcept { return step_; }
  const std::vector<double>& residual_history() const noexcept { return history_; }

private:
  int step_;
  std::vector<double> history_;
};

}  // namespace tgmfe
