#include "core/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdsde {

namespace {

// Accumulate sum over paths of sum_{i<N} dt * weighted |block|^2, averaged
// over paths. diff == nullptr means plain norm.
double accum(const PathArray& a, const PathArray* b, double dt, int rows, int cols,
             const double* col_weights) {
  const int N = a.nodes() - 1;
  const int M = a.paths();
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int p = 0; p < M; ++p) {
      const double* x = a.at(i, p);
      const double* y = b ? b->at(i, p) : nullptr;
      double s = 0.0;
      for (int c = 0; c < cols; ++c) {
        double colsq = 0.0;
        for (int r = 0; r < rows; ++r) {
          const int idx = c * rows + r;
          const double v = y ? x[idx] - y[idx] : x[idx];
          colsq += v * v;
        }
        s += col_weights ? col_weights[c] * colsq : colsq;
      }
      total += s;
    }
  }
  return total * dt / M;
}

DiscreteNorm build(const StatePaths& a, const StatePaths* b, const JumpMeasure& jumps) {
  const double dt = a.grid.dt();
  const Dimensions& dm = a.dims;
  DiscreteNorm out;
  const double sy = accum(a.y, b ? &b->y : nullptr, dt, dm.n, 1, nullptr);
  const double sY = accum(a.Y, b ? &b->Y : nullptr, dt, dm.m, 1, nullptr);
  const double sz = accum(a.z, b ? &b->z : nullptr, dt, dm.n, dm.l, nullptr);
  const double sZ = accum(a.Z, b ? &b->Z : nullptr, dt, dm.m, dm.d, nullptr);
  const double sk = accum(a.k, b ? &b->k : nullptr, dt, dm.m, a.jump_marks, jumps.weights.data());
  out.y = std::sqrt(sy);
  out.Y = std::sqrt(sY);
  out.z = std::sqrt(sz);
  out.Z = std::sqrt(sZ);
  out.k = std::sqrt(sk);
  out.value = std::sqrt(sy + sY + sz + sZ + sk);
  return out;
}

}  // namespace

DiscreteNorm m2_norm(const StatePaths& s, const JumpMeasure& jumps) {
  return build(s, nullptr, jumps);
}

DiscreteNorm m2_distance(const StatePaths& a, const StatePaths& b, const JumpMeasure& jumps) {
  if (a.paths != b.paths || a.grid.nodes() != b.grid.nodes()) {
    throw std::invalid_argument("m2_distance: mismatched path sets");
  }
  return build(a, &b, jumps);
}

double process_m2(const PathArray& a, double dt, int rows, int cols, const double* col_weights) {
  return std::sqrt(accum(a, nullptr, dt, rows, cols, col_weights));
}

double sup_block_norm(const PathArray& a) {
  double worst = 0.0;
  for (int i = 0; i < a.nodes(); ++i) {
    for (int p = 0; p < a.paths(); ++p) {
      worst = std::max(worst, a.vec(i, p).norm());
    }
  }
  return worst;
}

double sup_block_distance(const PathArray& a, const PathArray& b) {
  double worst = 0.0;
  for (int i = 0; i < a.nodes(); ++i) {
    for (int p = 0; p < a.paths(); ++p) {
      worst = std::max(worst, (a.vec(i, p) - b.vec(i, p)).norm());
    }
  }
  return worst;
}

}  // namespace fbdsde
