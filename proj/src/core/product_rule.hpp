#pragma once

#include "core/noise.hpp"
#include "core/paths.hpp"

namespace fbdsde {

// Integrands of one Ito-type process on the grid:
//   alpha_{i+1} = alpha_i + beta_i dt + gamma_{i+1} dB_i + delta_i dW_i
//                 + sum_j K_i(rho_j) dNtilde_{ij}.
// Note the backward-integral convention: gamma enters at the right node.
struct ItoIntegrands {
  int dim = 1;
  PathArray alpha0;  // nodes == 1, block dim
  PathArray beta;    // block dim, used at nodes 0..N-1
  PathArray gamma;   // block dim*l, used at nodes 1..N
  PathArray delta;   // block dim*d, used at nodes 0..N-1
  PathArray K;       // block dim*J, used at nodes 0..N-1

  static ItoIntegrands zeros(int dim, const NoiseBundle& noise);
};

// Accumulated paths of alpha at every node.
PathArray accumulate_ito(const ItoIntegrands& a, const NoiseBundle& noise);

struct ProductRuleReport {
  // (a) pathwise telescoping identity
  //     <aN,bN> - <a0,b0> = sum_i [<a_i, db_i> + <b_i, da_i> + <da_i, db_i>];
  //     exact algebra, residual is float noise.
  double pathwise_residual = 0.0;
  // (b) expectation form of the integration-by-parts rule, with the
  //     covariation corrections: MINUS the backward (dB) term, PLUS the
  //     forward (dW) and jump terms.
  double expectation_lhs = 0.0;
  double expectation_rhs = 0.0;
  double expectation_residual = 0.0;  // lhs - rhs
  double se = 0.0;                    // standard error of the residual mean
  int paths = 0;
  int steps = 0;
};

ProductRuleReport check_discrete_product_rule(const ItoIntegrands& a, const ItoIntegrands& b,
                                              const NoiseBundle& noise);

}  // namespace fbdsde
