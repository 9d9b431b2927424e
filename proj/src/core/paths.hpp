#pragma once

#include <cstdint>
#include <vector>

#include "core/types.hpp"

namespace fbdsde {

// Node-major storage for one process: a fixed-size block of doubles per
// (node, path). Matrix-valued blocks are column-major, matching Eigen.
class PathArray {
 public:
  PathArray() = default;
  PathArray(int nodes, int paths, int block)
      : nodes_(nodes), paths_(paths), block_(block),
        data_(static_cast<std::size_t>(nodes) * paths * block, 0.0) {}

  int nodes() const { return nodes_; }
  int paths() const { return paths_; }
  int block() const { return block_; }

  double* at(int i, int p) { return data_.data() + offset(i, p); }
  const double* at(int i, int p) const { return data_.data() + offset(i, p); }

  Eigen::Map<Vec> vec(int i, int p) { return {at(i, p), block_}; }
  Eigen::Map<const Vec> vec(int i, int p) const { return {at(i, p), block_}; }
  Eigen::Map<Mat> mat(int i, int p, int rows, int cols) { return {at(i, p), rows, cols}; }
  Eigen::Map<const Mat> mat(int i, int p, int rows, int cols) const { return {at(i, p), rows, cols}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

 private:
  std::size_t offset(int i, int p) const {
    return (static_cast<std::size_t>(i) * paths_ + p) * block_;
  }
  int nodes_ = 0;
  int paths_ = 0;
  int block_ = 0;
  std::vector<double> data_;
};

// Read-only view of one quintuple sample (y, Y, z, Z, k) assembled from raw
// pointers; the accessors hand out Eigen maps without copying.
struct StateView {
  const double* y_ptr;
  const double* Y_ptr;
  const double* z_ptr;
  const double* Z_ptr;
  const double* k_ptr;
  int n, m, l, d, J;

  Eigen::Map<const Vec> y() const { return {y_ptr, n}; }
  Eigen::Map<const Vec> Y() const { return {Y_ptr, m}; }
  Eigen::Map<const Mat> z() const { return {z_ptr, n, l}; }
  Eigen::Map<const Mat> Z() const { return {Z_ptr, m, d}; }
  Eigen::Map<const Mat> k() const { return {k_ptr, m, J}; }
};

// Owning quintuple value, mostly for probes and tests.
struct StateValue {
  Vec y, Y;
  Mat z, Z, k;

  static StateValue zero(const Dimensions& dims, int J);
  StateView view() const;
};

// Dual quintuple (p, P, q, Q, V) value for Hamiltonian evaluations.
struct AdjointValue {
  Vec p, P;
  Mat q, Q, V;

  static AdjointValue zero(const Dimensions& dims, int J);
};

struct AdjointView {
  const double* p_ptr;
  const double* P_ptr;
  const double* q_ptr;
  const double* Q_ptr;
  const double* V_ptr;
  int n, m, l, d, J;

  Eigen::Map<const Vec> p() const { return {p_ptr, m}; }
  Eigen::Map<const Vec> P() const { return {P_ptr, n}; }
  Eigen::Map<const Mat> q() const { return {q_ptr, m, l}; }
  Eigen::Map<const Mat> Q() const { return {Q_ptr, n, d}; }
  Eigen::Map<const Mat> V() const { return {V_ptr, n, J}; }
};

inline AdjointView view_of(const AdjointValue& a, const Dimensions& dims, int J) {
  return {a.p.data(), a.P.data(), a.q.data(), a.Q.data(), a.V.data(),
          dims.n, dims.m, dims.l, dims.d, J};
}

// Monte Carlo trajectories of the quintuple on a grid.
struct StatePaths {
  Dimensions dims;
  int jump_marks = 0;
  TimeGrid grid;
  int paths = 0;
  PathArray y;  // block n
  PathArray Y;  // block m
  PathArray z;  // block n*l
  PathArray Z;  // block m*d
  PathArray k;  // block m*J

  static StatePaths zeros(const Dimensions& dims, int jump_marks, const TimeGrid& grid, int paths);
  StateView view(int i, int p) const {
    return {y.at(i, p), Y.at(i, p), z.at(i, p), Z.at(i, p), k.at(i, p),
            dims.n, dims.m, dims.l, dims.d, jump_marks};
  }
};

// Adjoint trajectories (p, P, q, Q, V); dims refer to the underlying problem.
struct AdjointPaths {
  Dimensions dims;
  int jump_marks = 0;
  TimeGrid grid;
  int paths = 0;
  PathArray p;  // block m
  PathArray P;  // block n
  PathArray q;  // block m*l
  PathArray Q;  // block n*d
  PathArray V;  // block n*J

  static AdjointPaths zeros(const Dimensions& dims, int jump_marks, const TimeGrid& grid, int paths);
  AdjointView view(int i, int pth) const {
    return {p.at(i, pth), P.at(i, pth), q.at(i, pth), Q.at(i, pth), V.at(i, pth),
            dims.n, dims.m, dims.l, dims.d, jump_marks};
  }
};

// Control sampled on the grid. Open-loop controls hold one value per node
// shared by all paths; feedback controls hold per-node polynomial
// coefficients applied to the forward state and are projected at evaluation.
class ControlProcess {
 public:
  enum class Kind { OpenLoop, Feedback };

  static ControlProcess constant(const Vec& value, int nodes);
  static ControlProcess open_loop(Mat values);  // r x nodes
  static ControlProcess feedback(std::vector<Mat> node_coeffs, int degree);

  Kind kind() const { return kind_; }
  int nodes() const;
  int dim() const;

  // Open-loop access (throws on feedback controls).
  const Mat& values() const;
  Mat& values();

  // Feedback access.
  const std::vector<Mat>& coefficients() const { return coeffs_; }
  std::vector<Mat>& coefficients() { return coeffs_; }
  int feature_degree() const { return degree_; }

  // Evaluate at node i for a path with forward state y.
  void eval(int i, const ConstVecRef& y, const ControlSet& region, VecRef out) const;

 private:
  Kind kind_ = Kind::OpenLoop;
  Mat values_;               // open loop: r x nodes
  std::vector<Mat> coeffs_;  // feedback: per node, features x r
  int degree_ = 1;
};

// Monomial features of y with total degree <= degree (shared by feedback
// controls and tests).
void polynomial_features(const ConstVecRef& x, int degree, std::vector<double>& out);
int polynomial_feature_count(int vars, int degree);

}  // namespace fbdsde
