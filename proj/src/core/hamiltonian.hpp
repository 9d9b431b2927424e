#pragma once

#include "core/paths.hpp"
#include "core/problem.hpp"

namespace fbdsde {

// H(t, zeta, v; p, P, q, Q, V) = <p, f> - <P, b> + <q, g> - <Q, sigma> - l
//                                - sum_j w_j <V_j, phi_j>.
double eval_hamiltonian(const ProblemSpec& spec, double t, const StateView& s,
                        const AdjointView& a, const ConstVecRef& v);

// Gradients of H in the quintuple blocks and the control. The k block holds
// densities: the raw derivative in k(rho_j) divided by the mark weight w_j,
// which is the integrand that appears in the adjoint jump term.
struct HamiltonianGradients {
  Vec y, Y, z, Z, k, v;

  void resize(const Dimensions& dims, int marks);
};

void eval_hamiltonian_gradients(const ProblemSpec& spec, double t, const StateView& s,
                                const AdjointView& a, const ConstVecRef& v,
                                HamiltonianGradients& out);

}  // namespace fbdsde
