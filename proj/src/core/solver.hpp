#pragma once

#include <vector>

#include "core/noise.hpp"
#include "core/paths.hpp"
#include "core/problem.hpp"

namespace fbdsde {

// One coupled pair as seen by the numerical engine. The primal problem and
// the adjoint system both implement this interface, which is what lets a
// single simulate/regress/iterate engine solve either. Coefficients are
// indexed by (node, path) so implementations can close over per-path frozen
// data such as a control or a previously solved trajectory.
class SystemDynamics {
 public:
  virtual ~SystemDynamics() = default;

  virtual const Dimensions& dims() const = 0;
  virtual const JumpMeasure& jumps() const = 0;

  // Terminal coupling X_m(T) = c R X_n(T) + shift(p).
  virtual double terminal_c() const = 0;
  virtual const Mat& terminal_R() const = 0;
  virtual void terminal_shift(int p, VecRef out) const = 0;  // length m
  virtual void initial_state(int p, VecRef out) const = 0;   // length n

  // Flattened outputs as in CoefficientSet; `s` carries the system's own
  // quintuple.
  virtual void eval_b(int i, int p, double t, const StateView& s, VecRef out) const = 0;
  virtual void eval_sigma(int i, int p, double t, const StateView& s, VecRef out) const = 0;
  virtual void eval_phi(int i, int p, double t, const StateView& s, VecRef out) const = 0;
  virtual void eval_f(int i, int p, double t, const StateView& s, VecRef out) const = 0;
  virtual void eval_g(int i, int p, double t, const StateView& s, VecRef out) const = 0;

  // True when the coefficient Jacobians with respect to (z, Z, k) do not
  // depend on the evaluation point, so one Jacobian per node serves every
  // path. Linear-quadratic problems and their adjoints qualify.
  virtual bool integrand_jacobians_shared() const { return false; }

  // Additional regression variables beyond the forward state and the
  // remaining backward-noise increment (the adjoint solve conditions on the
  // frozen primal state this way).
  virtual int extra_vars() const { return 0; }
  virtual void extra(int i, int p, double* out) const {
    (void)i;
    (void)p;
    (void)out;
  }
};

struct SolveOptions {
  double theta = 0.5;  // damping weight on the new iterate
  double tol = 1e-4;   // iterate distance below which the loop stops
  int max_iter = 50;
  int basis_degree = 2;
  bool warm_start = false;  // reuse `state` as the initial iterate
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> changes;     // successive iterate distances
  double terminal_residual = 0.0;  // pre-enforcement mismatch, last iteration
  double max_condition = 0.0;      // worst regression condition estimate
  int min_rank = 0;
  int worst_node = -1;  // node attaining max_condition
};

// Damped Picard iteration on the full quintuple of a generic system.
SolveReport solve_coupled(const SystemDynamics& sys, const NoiseBundle& noise,
                          const SolveOptions& opt, StatePaths& state);

// Problem-level wrappers around the same engine.
SolveReport solve_fbdsde(const ProblemSpec& spec, const ControlProcess& control,
                         const NoiseBundle& noise, const SolveOptions& opt, StatePaths& state);

// Forward component only: fills state.y from x0 holding the backward
// components of `state` fixed.
void simulate_forward(const ProblemSpec& spec, const ControlProcess& control,
                      const NoiseBundle& noise, StatePaths& state);

// Backward components only: y and z of `state` are held fixed while (Y, Z, k)
// are re-solved by damped regression sweeps.
SolveReport solve_backward(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const SolveOptions& opt, StatePaths& state);

}  // namespace fbdsde
