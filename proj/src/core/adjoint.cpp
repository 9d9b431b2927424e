#include "core/adjoint.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace fbdsde {

namespace {

// Linear maps from the stacked adjoint value [p; P; vec q; vec Q; vec V] to
// the five Hamiltonian gradients at one node (k rows already densities).
struct NodeT {
  Mat TY, TZ, Tk, Ty, Tz;
};

class AdjointDynamics final : public SystemDynamics {
 public:
  AdjointDynamics(const ProblemSpec& spec, const ControlProcess& control,
                  const NoiseBundle& noise, const StatePaths& primal)
      : spec_(spec), control_(control), primal_(primal) {
    const Dimensions& pd = spec.dims;
    dims_ = Dimensions{pd.m, pd.n, pd.l, pd.d, pd.r};
    J_ = spec.marks();
    A_ = pd.m + pd.n + pd.m * pd.l + pd.n * pd.d + pd.n * J_;
    grid_ = TimeGrid{noise.T, noise.steps};
    RT_ = spec.terminal.R.transpose();
    const int N = noise.steps;
    const int M = noise.paths;

    tshift_ = PathArray(1, M, pd.n);
    init_ = PathArray(1, M, pd.m);
    for (int p = 0; p < M; ++p) {
      auto sh = tshift_.vec(0, p);
      eval_terminal_cost_gradient(spec_, primal.y.vec(N, p), sh);
      auto start = init_.vec(0, p);
      eval_initial_cost_gradient(spec_, primal.Y.vec(0, p), start);
      start *= -1.0;
    }

    // Running-cost gradients along the frozen trajectory, the inhomogeneous
    // part of every adjoint coefficient.
    lY_ = PathArray(N + 1, M, pd.m);
    lZ_ = PathArray(N + 1, M, pd.m * pd.d);
    lk_ = PathArray(N + 1, M, pd.m * J_);
    ly_ = PathArray(N + 1, M, pd.n);
    lz_ = PathArray(N + 1, M, pd.n * pd.l);
    CostGradient lc;
    Vec v(pd.r);
    for (int i = 0; i <= N; ++i) {
      const double t = grid_.t(i);
      for (int p = 0; p < M; ++p) {
        const StateView s = primal.view(i, p);
        control_.eval(i, s.y(), spec_.controls, v);
        eval_running_cost_gradient(spec_, t, s, v, lc);
        lY_.vec(i, p) = lc.Y;
        lZ_.vec(i, p) = lc.Z;
        ly_.vec(i, p) = lc.y;
        lz_.vec(i, p) = lc.z;
        auto kd = lk_.vec(i, p);
        kd = lc.k;
        for (int j = 0; j < J_; ++j) {
          kd.segment(static_cast<Eigen::Index>(j) * pd.m, pd.m) /= spec_.jumps.weights[j];
        }
      }
    }

    if (spec_.coeffs.jacobians_state_independent) {
      tmats_.resize(static_cast<std::size_t>(N) + 1);
      for (int i = 0; i <= N; ++i) {
        const StateView s = primal.view(i, 0);
        control_.eval(i, s.y(), spec_.controls, v);
        build_T(grid_.t(i), s, v, tmats_[static_cast<std::size_t>(i)]);
      }
    }
  }

  const Dimensions& dims() const override { return dims_; }
  const JumpMeasure& jumps() const override { return spec_.jumps; }
  double terminal_c() const override { return -spec_.terminal.c; }
  const Mat& terminal_R() const override { return RT_; }
  void terminal_shift(int p, VecRef out) const override { out = tshift_.vec(0, p); }
  void initial_state(int p, VecRef out) const override { out = init_.vec(0, p); }

  void eval_b(int i, int p, double t, const StateView& s, VecRef out) const override {
    out.noalias() = node_T(i, p, t).TY * stack(s);
    out -= lY_.vec(i, p);
  }
  void eval_sigma(int i, int p, double t, const StateView& s, VecRef out) const override {
    out.noalias() = node_T(i, p, t).TZ * stack(s);
    out -= lZ_.vec(i, p);
  }
  void eval_phi(int i, int p, double t, const StateView& s, VecRef out) const override {
    out.noalias() = node_T(i, p, t).Tk * stack(s);
    out -= lk_.vec(i, p);
  }
  void eval_f(int i, int p, double t, const StateView& s, VecRef out) const override {
    out = ly_.vec(i, p);
    out.noalias() -= node_T(i, p, t).Ty * stack(s);
  }
  void eval_g(int i, int p, double t, const StateView& s, VecRef out) const override {
    out = lz_.vec(i, p);
    out.noalias() -= node_T(i, p, t).Tz * stack(s);
  }

  bool integrand_jacobians_shared() const override {
    return spec_.coeffs.jacobians_state_independent;
  }

  int extra_vars() const override { return spec_.dims.n; }
  void extra(int i, int p, double* out) const override {
    const double* y = primal_.y.at(i, p);
    std::copy(y, y + spec_.dims.n, out);
  }

 private:
  const Vec& stack(const StateView& s) const {
    thread_local Vec st;
    st.resize(A_);
    const Dimensions& pd = spec_.dims;
    Eigen::Index off = 0;
    st.segment(off, pd.m) = Eigen::Map<const Vec>(s.y_ptr, pd.m);
    off += pd.m;
    st.segment(off, pd.n) = Eigen::Map<const Vec>(s.Y_ptr, pd.n);
    off += pd.n;
    st.segment(off, pd.m * pd.l) = Eigen::Map<const Vec>(s.z_ptr, pd.m * pd.l);
    off += pd.m * pd.l;
    st.segment(off, pd.n * pd.d) = Eigen::Map<const Vec>(s.Z_ptr, pd.n * pd.d);
    off += pd.n * pd.d;
    st.segment(off, pd.n * J_) = Eigen::Map<const Vec>(s.k_ptr, pd.n * J_);
    return st;
  }

  const NodeT& node_T(int i, int p, double t) const {
    if (!tmats_.empty()) return tmats_[static_cast<std::size_t>(i)];
    thread_local NodeT local;
    thread_local Vec v;
    v.resize(spec_.dims.r);
    const StateView s = primal_.view(i, p);
    control_.eval(i, s.y(), spec_.controls, v);
    build_T(t, s, v, local);
    return local;
  }

  void build_T(double t, const StateView& s, const ConstVecRef& v, NodeT& T) const {
    thread_local BlockJacobian jb, js, jp, jf, jg;
    eval_coeff_jacobian(spec_, Coeff::B, t, s, v, jb);
    eval_coeff_jacobian(spec_, Coeff::Sigma, t, s, v, js);
    eval_coeff_jacobian(spec_, Coeff::Phi, t, s, v, jp);
    eval_coeff_jacobian(spec_, Coeff::F, t, s, v, jf);
    eval_coeff_jacobian(spec_, Coeff::G, t, s, v, jg);

    const Dimensions& pd = spec_.dims;
    const int m = pd.m;
    const int n = pd.n;
    auto fill = [&](Mat& dst, const Mat& Jf, const Mat& Jb, const Mat& Jg, const Mat& Js,
                    const Mat& Jp) {
      const Eigen::Index cols = Jf.cols();
      dst.resize(cols, A_);
      Eigen::Index off = 0;
      dst.middleCols(off, m) = Jf.transpose();
      off += m;
      dst.middleCols(off, n) = -Jb.transpose();
      off += n;
      dst.middleCols(off, m * pd.l) = Jg.transpose();
      off += m * pd.l;
      dst.middleCols(off, n * pd.d) = -Js.transpose();
      off += n * pd.d;
      Mat scaled = Jp;
      for (int j = 0; j < J_; ++j) {
        scaled.middleRows(static_cast<Eigen::Index>(j) * n, n) *= spec_.jumps.weights[j];
      }
      dst.middleCols(off, n * J_) = -scaled.transpose();
    };
    fill(T.TY, jf.Y, jb.Y, jg.Y, js.Y, jp.Y);
    fill(T.TZ, jf.Z, jb.Z, jg.Z, js.Z, jp.Z);
    fill(T.Tk, jf.k, jb.k, jg.k, js.k, jp.k);
    for (int j = 0; j < J_; ++j) {
      T.Tk.middleRows(static_cast<Eigen::Index>(j) * m, m) /= spec_.jumps.weights[j];
    }
    fill(T.Ty, jf.y, jb.y, jg.y, js.y, jp.y);
    fill(T.Tz, jf.z, jb.z, jg.z, js.z, jp.z);
  }

  const ProblemSpec& spec_;
  const ControlProcess& control_;
  const StatePaths& primal_;
  Dimensions dims_;
  TimeGrid grid_;
  Mat RT_;
  int J_ = 0;
  int A_ = 0;
  PathArray tshift_, init_;
  PathArray lY_, lZ_, lk_, ly_, lz_;
  std::vector<NodeT> tmats_;
};

}  // namespace

SolveReport solve_adjoint(const ProblemSpec& spec, const ControlProcess& control,
                          const NoiseBundle& noise, const StatePaths& primal,
                          const SolveOptions& opt, AdjointPaths& adjoint) {
  if (primal.paths != noise.paths || primal.grid.steps != noise.steps) {
    throw std::invalid_argument("adjoint: primal trajectory does not match the noise bundle");
  }
  AdjointDynamics sys(spec, control, noise, primal);
  const TimeGrid grid{noise.T, noise.steps};
  const int J = spec.marks();
  const Dimensions& pd = spec.dims;

  StatePaths tmpl = StatePaths::zeros(sys.dims(), J, grid, noise.paths);
  SolveOptions local = opt;
  const bool warm_ok = opt.warm_start && adjoint.paths == noise.paths &&
                       adjoint.grid.steps == noise.steps && adjoint.p.block() == pd.m &&
                       adjoint.P.block() == pd.n && adjoint.q.block() == pd.m * pd.l &&
                       adjoint.Q.block() == pd.n * pd.d && adjoint.V.block() == pd.n * J;
  if (warm_ok) {
    tmpl.y.data() = adjoint.p.data();
    tmpl.Y.data() = adjoint.P.data();
    tmpl.z.data() = adjoint.q.data();
    tmpl.Z.data() = adjoint.Q.data();
    tmpl.k.data() = adjoint.V.data();
  } else {
    local.warm_start = false;
  }

  const SolveReport rep = solve_coupled(sys, noise, local, tmpl);

  adjoint.dims = pd;
  adjoint.jump_marks = J;
  adjoint.grid = grid;
  adjoint.paths = noise.paths;
  adjoint.p = std::move(tmpl.y);
  adjoint.P = std::move(tmpl.Y);
  adjoint.q = std::move(tmpl.z);
  adjoint.Q = std::move(tmpl.Z);
  adjoint.V = std::move(tmpl.k);
  return rep;
}

}  // namespace fbdsde
