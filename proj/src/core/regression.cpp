#include "core/regression.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/paths.hpp"

namespace fbdsde {

int RegressionBasis::features(int vars) const { return polynomial_feature_count(vars, degree); }

void RegressionBasis::fill_row(const double* vars, int count, double* row) const {
  thread_local std::vector<double> scratch;
  polynomial_features(Eigen::Map<const Vec>(vars, count), degree, scratch);
  std::copy(scratch.begin(), scratch.end(), row);
}

void NodeRegression::factorize(Mat design, int node) {
  if (!design.allFinite()) {
    throw std::runtime_error("regression: non-finite design entries at node " +
                             std::to_string(node));
  }
  design_ = std::move(design);
  qr_.compute(design_);
  rank_ = static_cast<int>(qr_.rank());
  const auto diag = qr_.matrixR().diagonal().cwiseAbs();
  condition_ = (rank_ > 0 && diag(rank_ - 1) > 0.0) ? diag(0) / diag(rank_ - 1) : 0.0;
  node_ = node;
  ready_ = true;
}

void NodeRegression::fit(const ConstMatRef& targets, MatRef fitted) const {
  if (!ready_) throw std::logic_error("regression: fit before factorize");
  if (targets.rows() != design_.rows()) {
    throw std::invalid_argument("regression: target rows do not match design at node " +
                                std::to_string(node_));
  }
  if (!targets.allFinite()) {
    throw std::runtime_error("regression: non-finite targets at node " + std::to_string(node_));
  }
  fitted.noalias() = design_ * qr_.solve(targets);
}

}  // namespace fbdsde
