#pragma once

#include "core/types.hpp"

namespace fbdsde {

// Monomial design of total degree <= degree over a small set of per-path
// conditioning variables (forward state, remaining backward-noise increment,
// optional frozen extras).
struct RegressionBasis {
  int degree = 2;

  int features(int vars) const;
  void fill_row(const double* vars, int count, double* row) const;
};

// Least-squares projection at one time node: factorize the design once with
// a rank-revealing QR, then fit any number of target columns against it.
class NodeRegression {
 public:
  // Throws std::runtime_error on non-finite design entries.
  void factorize(Mat design, int node);
  bool ready() const { return ready_; }

  // Fitted values at the design points, one target per column. Throws on
  // non-finite targets.
  void fit(const ConstMatRef& targets, MatRef fitted) const;

  int rank() const { return rank_; }
  double condition() const { return condition_; }
  int node() const { return node_; }

 private:
  Mat design_;
  Eigen::ColPivHouseholderQR<Mat> qr_;
  int rank_ = 0;
  double condition_ = 0.0;
  int node_ = -1;
  bool ready_ = false;
};

}  // namespace fbdsde
