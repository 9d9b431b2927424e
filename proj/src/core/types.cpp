#include "core/types.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdsde {

void Dimensions::validate() const {
  if (n < 1 || m < 1 || l < 1 || d < 1 || r < 1) {
    throw std::invalid_argument("dims: n, m, l, d, r must all be >= 1");
  }
}

double JumpMeasure::intensity() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void JumpMeasure::validate() const {
  if (marks.empty()) {
    throw std::invalid_argument("jumps.marks: at least one mark is required");
  }
  if (marks.size() != weights.size()) {
    throw std::invalid_argument("jumps: marks and weights must have equal length");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("jumps.weights: every weight must be finite and > 0");
    }
  }
  for (double rho : marks) {
    if (!std::isfinite(rho)) {
      throw std::invalid_argument("jumps.marks: marks must be finite");
    }
  }
}

void TerminalMap::validate(const Dimensions& dims) const {
  if (c == 0.0 || !std::isfinite(c)) {
    throw std::invalid_argument("terminal.c: must be finite and nonzero");
  }
  if (R.rows() != dims.m || R.cols() != dims.n) {
    throw std::invalid_argument("terminal.R: shape mismatch, expected m x n");
  }
  if (xi.size() != dims.m) {
    throw std::invalid_argument("terminal.xi: expected length m");
  }
  Eigen::ColPivHouseholderQR<Mat> qr(R);
  if (qr.rank() < std::min(dims.m, dims.n)) {
    throw std::invalid_argument("terminal.R: must have full rank");
  }
}

Vec ControlSet::project(const Vec& v) const {
  if (kind == Kind::Projection) {
    return projection(v);
  }
  Vec out = v;
  for (int i = 0; i < out.size(); ++i) {
    out[i] = std::min(hi[i], std::max(lo[i], out[i]));
  }
  return out;
}

Vec ControlSet::center(int r) const {
  if (kind == Kind::Projection) {
    return projection(Vec::Zero(r));
  }
  return 0.5 * (lo + hi);
}

void ControlSet::validate(int r) const {
  if (kind == Kind::Projection) {
    if (!projection) {
      throw std::invalid_argument("controls: projection region without a projection map");
    }
    return;
  }
  if (lo.size() != r || hi.size() != r) {
    throw std::invalid_argument("controls: box bounds must have length r");
  }
  for (int i = 0; i < r; ++i) {
    if (!(lo[i] <= hi[i])) {
      throw std::invalid_argument("controls: box requires lo <= hi componentwise");
    }
  }
}

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument("horizon.T: must be finite and > 0");
  }
  if (steps < 1) {
    throw std::invalid_argument("grid steps must be >= 1");
  }
}

}  // namespace fbdsde
