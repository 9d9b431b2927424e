#pragma once

#include "core/paths.hpp"
#include "core/types.hpp"

namespace fbdsde {

// Discrete counterpart of the solution-space norm:
//   value^2 = mean over paths of sum_{i<N} dt * (|y_i|^2 + |Y_i|^2 + |z_i|^2
//             + |Z_i|^2 + sum_j w_j |k_i(rho_j)|^2).
// Component fields are the square roots of the individual contributions.
struct DiscreteNorm {
  double value = 0.0;
  double y = 0.0, Y = 0.0, z = 0.0, Z = 0.0, k = 0.0;
};

DiscreteNorm m2_norm(const StatePaths& s, const JumpMeasure& jumps);
DiscreteNorm m2_distance(const StatePaths& a, const StatePaths& b, const JumpMeasure& jumps);

// Same quadrature for a single process; `weights` (if non-null) scales the
// squared block entries per column of a (rows x cols) block, as the jump
// component does with the mark weights.
double process_m2(const PathArray& a, double dt, int rows, int cols, const double* col_weights);

// Sup of Euclidean block norms over (node, path).
double sup_block_norm(const PathArray& a);
double sup_block_distance(const PathArray& a, const PathArray& b);

}  // namespace fbdsde
