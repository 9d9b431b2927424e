#pragma once

#include <string>
#include <vector>

#include "core/noise.hpp"
#include "core/paths.hpp"
#include "core/problem.hpp"
#include "core/solver.hpp"

namespace fbdsde {

struct CostEstimate {
  double value = 0.0;
  double se = 0.0;
  double running = 0.0;   // mean of the time-quadrature piece
  double terminal = 0.0;  // mean of beta(y_T)
  double initial = 0.0;   // mean of gamma(Y_0)
  bool converged = true;
};

// Cost of an already-solved trajectory: trapezoid quadrature on the running
// term plus the two endpoint pieces, averaged over paths.
CostEstimate cost_of_state(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const StatePaths& state);

// Solve on the given noise, then evaluate.
CostEstimate estimate_cost(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const SolveOptions& opt);

struct OptimizeOptions {
  SolveOptions solve;
  int max_iter = 200;
  double step0 = 1.0;
  double step_cap = 8.0;
  double min_step = 1e-6;  // line search gives up below this
  double grad_tol = 1e-3;  // projected-gradient sup norm stop
};

struct OptimizeReport {
  bool converged = false;
  std::string stop_reason;  // "gradient", "step", "max-iter", "solver"
  int iterations = 0;
  std::vector<double> cost_trace;  // accepted costs, starting value first
  std::vector<double> grad_trace;  // gradient norms per iteration
  double final_cost = 0.0;
  double final_cost_se = 0.0;
  double final_grad_norm = 0.0;
};

// Hamiltonian ascent with projection onto the control set and a
// backtracking line search on the estimated cost. All iterates share the
// supplied noise, so accepted costs are monotone by construction and the
// line search collapsing at the Monte Carlo floor is a normal exit.
// `control` is updated in place.
OptimizeReport optimize_control(const ProblemSpec& spec, const NoiseBundle& noise,
                                const OptimizeOptions& opt, ControlProcess& control);

}  // namespace fbdsde
