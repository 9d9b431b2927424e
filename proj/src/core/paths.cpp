#include "core/paths.hpp"

#include <stdexcept>

namespace fbdsde {

StateValue StateValue::zero(const Dimensions& dims, int J) {
  StateValue s;
  s.y = Vec::Zero(dims.n);
  s.Y = Vec::Zero(dims.m);
  s.z = Mat::Zero(dims.n, dims.l);
  s.Z = Mat::Zero(dims.m, dims.d);
  s.k = Mat::Zero(dims.m, J);
  return s;
}

StateView StateValue::view() const {
  return {y.data(), Y.data(), z.data(), Z.data(), k.data(),
          static_cast<int>(y.size()), static_cast<int>(Y.size()),
          static_cast<int>(z.cols()), static_cast<int>(Z.cols()),
          static_cast<int>(k.cols())};
}

AdjointValue AdjointValue::zero(const Dimensions& dims, int J) {
  AdjointValue a;
  a.p = Vec::Zero(dims.m);
  a.P = Vec::Zero(dims.n);
  a.q = Mat::Zero(dims.m, dims.l);
  a.Q = Mat::Zero(dims.n, dims.d);
  a.V = Mat::Zero(dims.n, J);
  return a;
}

StatePaths StatePaths::zeros(const Dimensions& dims, int jump_marks, const TimeGrid& grid, int paths) {
  StatePaths s;
  s.dims = dims;
  s.jump_marks = jump_marks;
  s.grid = grid;
  s.paths = paths;
  const int nodes = grid.nodes();
  s.y = PathArray(nodes, paths, dims.n);
  s.Y = PathArray(nodes, paths, dims.m);
  s.z = PathArray(nodes, paths, dims.zdim());
  s.Z = PathArray(nodes, paths, dims.Zdim());
  s.k = PathArray(nodes, paths, dims.m * jump_marks);
  return s;
}

AdjointPaths AdjointPaths::zeros(const Dimensions& dims, int jump_marks, const TimeGrid& grid, int paths) {
  AdjointPaths a;
  a.dims = dims;
  a.jump_marks = jump_marks;
  a.grid = grid;
  a.paths = paths;
  const int nodes = grid.nodes();
  a.p = PathArray(nodes, paths, dims.m);
  a.P = PathArray(nodes, paths, dims.n);
  a.q = PathArray(nodes, paths, dims.m * dims.l);
  a.Q = PathArray(nodes, paths, dims.n * dims.d);
  a.V = PathArray(nodes, paths, dims.n * jump_marks);
  return a;
}

ControlProcess ControlProcess::constant(const Vec& value, int nodes) {
  ControlProcess c;
  c.kind_ = Kind::OpenLoop;
  c.values_ = value.replicate(1, nodes);
  return c;
}

ControlProcess ControlProcess::open_loop(Mat values) {
  ControlProcess c;
  c.kind_ = Kind::OpenLoop;
  c.values_ = std::move(values);
  return c;
}

ControlProcess ControlProcess::feedback(std::vector<Mat> node_coeffs, int degree) {
  ControlProcess c;
  c.kind_ = Kind::Feedback;
  c.coeffs_ = std::move(node_coeffs);
  c.degree_ = degree;
  return c;
}

int ControlProcess::nodes() const {
  return kind_ == Kind::OpenLoop ? static_cast<int>(values_.cols())
                                 : static_cast<int>(coeffs_.size());
}

int ControlProcess::dim() const {
  return kind_ == Kind::OpenLoop ? static_cast<int>(values_.rows())
                                 : static_cast<int>(coeffs_.empty() ? 0 : coeffs_.front().cols());
}

const Mat& ControlProcess::values() const {
  if (kind_ != Kind::OpenLoop) throw std::logic_error("control: values() on a feedback control");
  return values_;
}

Mat& ControlProcess::values() {
  if (kind_ != Kind::OpenLoop) throw std::logic_error("control: values() on a feedback control");
  return values_;
}

void ControlProcess::eval(int i, const ConstVecRef& y, const ControlSet& region, VecRef out) const {
  if (kind_ == Kind::OpenLoop) {
    out = region.project(values_.col(i));
    return;
  }
  static thread_local std::vector<double> feat;
  polynomial_features(y, degree_, feat);
  const Mat& C = coeffs_[i];
  if (C.rows() != static_cast<int>(feat.size())) {
    throw std::logic_error("control: feedback coefficient rows do not match feature count");
  }
  Vec raw = Vec::Zero(C.cols());
  for (int f = 0; f < C.rows(); ++f) raw += feat[f] * C.row(f).transpose();
  out = region.project(raw);
}

int polynomial_feature_count(int vars, int degree) {
  // C(vars + degree, degree)
  long long num = 1, den = 1;
  for (int i = 1; i <= degree; ++i) {
    num *= vars + i;
    den *= i;
  }
  return static_cast<int>(num / den);
}

namespace {
void expand(const ConstVecRef& x, int first, int degree_left, double acc, std::vector<double>& out) {
  out.push_back(acc);
  if (degree_left == 0) return;
  for (int v = first; v < x.size(); ++v) {
    expand(x, v, degree_left - 1, acc * x[v], out);
  }
}
}  // namespace

void polynomial_features(const ConstVecRef& x, int degree, std::vector<double>& out) {
  out.clear();
  expand(x, 0, degree, 1.0, out);
}

}  // namespace fbdsde
