#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/adjoint.hpp"
#include "core/noise.hpp"
#include "core/paths.hpp"
#include "core/problem.hpp"
#include "core/solver.hpp"

namespace fbdsde {

// Sampled estimate of the coupling bracket
//   <dA, dzeta> = -<dy, R' df> + <dY, R db> - <dz, R' dg> + <dZ, R dsigma>
//                 + sum_j w_j <dk_j, R dphi_j>
// against the split increment weights
//   a = |R dy|^2 + |R' dY|^2,
//   b = |R dz|^2 + |R' dZ|^2 + sum_j w_j |R' dk_j|^2.
// regime "A1" means bracket <= -(mu1 a + mu2 b) with c > 0 on every sample,
// "A1-prime" the reversed inequality with c < 0, "violated" a sign pattern
// compatible with neither, "inconclusive" a degenerate sample set. The
// moduli come from a nonnegative least-squares fit scaled down until the
// inequality holds on every sample, so they are certified lower bounds on
// the sampled increments rather than best-fit values.
struct MonotonicityReport {
  std::string regime;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double c = 0.0;
  double bracket_min = 0.0;
  double bracket_max = 0.0;
  double fit_residual = 0.0;  // rms residual of the fit (A1/A1-prime only)
  int samples = 0;
};

MonotonicityReport audit_monotonicity(const ProblemSpec& spec, int samples, std::uint64_t seed);

// Midpoint convexity probes of the three cost pieces. Margins are the
// minimum over probes of (f(x1) + f(x2))/2 - f((x1+x2)/2).
struct ConvexityReport {
  double running_min = 0.0;
  double terminal_min = 0.0;
  double initial_min = 0.0;
  bool convex = false;
  int probes = 0;
};

ConvexityReport check_cost_convexity(const ProblemSpec& spec, int probes, std::uint64_t seed);

// Midpoint concavity probes of H in (zeta, v) at the supplied adjoint
// anchors; margin is min over probes of H(mid) - (H(x1) + H(x2))/2.
struct ConcavityReport {
  double min_margin = 0.0;
  bool concave = false;
  int probes = 0;
};

ConcavityReport check_hamiltonian_concavity(const ProblemSpec& spec,
                                            const std::vector<std::pair<double, AdjointValue>>& anchors,
                                            int pairs_per_anchor, std::uint64_t seed);

// Grid search for Hamiltonian values above the candidate control's, over a
// control grid and a path subsample, with the solved trajectory and adjoint
// frozen. holds == true means no grid value beats the candidate by more
// than tol anywhere.
struct MaximumConditionReport {
  double worst_gap = 0.0;
  int worst_node = -1;
  int worst_path = -1;
  Vec worst_control;
  bool holds = false;
  int probes = 0;
};

MaximumConditionReport check_maximum_condition(const ProblemSpec& spec, const StatePaths& state,
                                               const AdjointPaths& adjoint,
                                               const ControlProcess& candidate, int grid_points,
                                               int path_stride, double tol);

// Monte Carlo residuals of the two pairing identities behind the cost gap
// bound, evaluated between the solutions at controls u and v on shared
// noise. backward_* pairs p with the backward increment, forward_* pairs P
// with the forward one. gap_lhs - gap_rhs estimates J(v) - J(u) minus its
// duality lower bound, which should be nonnegative up to noise.
struct DualityReport {
  double backward_residual = 0.0;
  double backward_se = 0.0;
  double forward_residual = 0.0;
  double forward_se = 0.0;
  double gap_lhs = 0.0;
  double gap_rhs = 0.0;
  double gap_margin_se = 0.0;
  double terminal_cancellation = 0.0;  // max pathwise |<c R' p, dy> - <p, dY>|
  int paths = 0;
};

DualityReport check_duality(const ProblemSpec& spec, const ControlProcess& u,
                            const ControlProcess& v, const NoiseBundle& noise,
                            const SolveOptions& opt);

// Full certificate for a candidate control: solve, adjoint, maximum
// condition, concavity/convexity probes, monotonicity regime and optional
// cost-gap probes against perturbed controls. A failed monotonicity regime
// only warns; failed convexity, concavity, criticality or solver
// convergence defeats the verdict.
struct CertifyOptions {
  SolveOptions solve;
  int grid_points = 41;
  int path_stride = 64;
  double max_condition_tol = 1e-8;
  int shape_probes = 200;
  int monotonicity_samples = 10000;
  int gap_probes = 2;
  std::uint64_t seed = 1;
};

struct SufficiencyReport {
  bool verdict = false;
  bool solver_converged = false;
  bool candidate_critical = false;
  bool hamiltonian_concave = false;
  bool cost_convex = false;
  bool gap_probes_pass = false;
  double min_gap_margin = 0.0;  // min over probes of J(v)-J(u) + E int <H_v, v-u>
  MaximumConditionReport max_condition;
  ConcavityReport concavity;
  ConvexityReport convexity;
  MonotonicityReport monotonicity;
  std::vector<std::string> warnings;
};

SufficiencyReport certify_control(const ProblemSpec& spec, const ControlProcess& candidate,
                                  const NoiseBundle& noise, const CertifyOptions& opt);

}  // namespace fbdsde
