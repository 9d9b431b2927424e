#pragma once

#include "core/noise.hpp"
#include "core/paths.hpp"
#include "core/problem.hpp"
#include "core/solver.hpp"

namespace fbdsde {

// Solves the adjoint pair attached to a solved trajectory and control:
//   dp = H_Y dt + H_Z dW - q dB + sum_j H_k(rho_j) dN_j,   p(0) = -gamma_Y(Y_0)
//   dP = H_y dt + H_z dB + Q dW + sum_j V_j dN_j,          P(T) = -c R' p(T) + beta_y(y_T)
// with every Hamiltonian gradient evaluated along the frozen primal
// trajectory. The pair is linear in (p, P, q, Q, V) and maps onto the same
// engine as the primal problem with the roles relabeled; its regressions
// additionally condition on the frozen forward state. With warm_start set,
// `adjoint` seeds the iteration when its shape matches.
SolveReport solve_adjoint(const ProblemSpec& spec, const ControlProcess& control,
                          const NoiseBundle& noise, const StatePaths& primal,
                          const SolveOptions& opt, AdjointPaths& adjoint);

}  // namespace fbdsde
