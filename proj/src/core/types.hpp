#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace fbdsde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vec>;
using ConstVecRef = Eigen::Ref<const Vec>;
using MatRef = Eigen::Ref<Mat>;
using ConstMatRef = Eigen::Ref<const Mat>;

// Sizes of the coupled pair. Forward state y lives in R^n, backward state Y
// in R^m. z (n x l) rides the backward Brownian motion inside the forward
// equation, Z (m x d) rides the forward Brownian motion inside the backward
// equation, and the jump integrand k holds one R^m column per mark.
// Controls live in R^r.
struct Dimensions {
  int n = 1;
  int m = 1;
  int l = 1;
  int d = 1;
  int r = 1;

  int zdim() const { return n * l; }
  int Zdim() const { return m * d; }
  void validate() const;  // throws std::invalid_argument
};

// Finite driving measure for the jump part: atoms rho_j with weights
// w_j = nu({rho_j}) > 0. The compensator of each counting process is w_j*dt.
struct JumpMeasure {
  std::vector<double> marks;
  std::vector<double> weights;

  int count() const { return static_cast<int>(marks.size()); }
  double intensity() const;
  void validate() const;
};

// Terminal coupling Y_T = c * R * y_T + xi with c != 0 and R full rank.
struct TerminalMap {
  double c = 1.0;
  Mat R;   // m x n
  Vec xi;  // length m

  Vec apply(const ConstVecRef& x) const { return c * (R * x) + xi; }
  void validate(const Dimensions& dims) const;
};

// Admissible control region. Box regions clamp componentwise; custom regions
// supply their own projection, which must be idempotent.
struct ControlSet {
  enum class Kind { Box, Projection };
  Kind kind = Kind::Box;
  Vec lo;
  Vec hi;
  std::function<Vec(const Vec&)> projection;

  Vec project(const Vec& v) const;
  Vec center(int r) const;
  void validate(int r) const;
};

// Uniform grid 0 = t_0 < ... < t_N = T.
struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  double dt() const { return T / steps; }
  int nodes() const { return steps + 1; }
  double t(int i) const { return i >= steps ? T : T * (static_cast<double>(i) / steps); }
  void validate() const;
};

}  // namespace fbdsde
