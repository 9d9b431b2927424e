#include "core/hamiltonian.hpp"

namespace fbdsde {

namespace {

Eigen::Map<const Vec> vec_q(const AdjointView& a) { return {a.q_ptr, a.m * a.l}; }
Eigen::Map<const Vec> vec_Q(const AdjointView& a) { return {a.Q_ptr, a.n * a.d}; }

}  // namespace

double eval_hamiltonian(const ProblemSpec& spec, double t, const StateView& s,
                        const AdjointView& a, const ConstVecRef& v) {
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  thread_local Vec b, sig, phi, f, g;
  b.resize(dims.n);
  sig.resize(dims.n * dims.d);
  phi.resize(dims.n * J);
  f.resize(dims.m);
  g.resize(dims.m * dims.l);
  spec.coeffs.b(t, s, v, b);
  spec.coeffs.sigma(t, s, v, sig);
  spec.coeffs.phi(t, s, v, phi);
  spec.coeffs.f(t, s, v, f);
  spec.coeffs.g(t, s, v, g);

  double h = a.p().dot(f) - a.P().dot(b) + vec_q(a).dot(g) - vec_Q(a).dot(sig);
  h -= spec.cost.running(t, s, v);
  for (int j = 0; j < J; ++j) {
    h -= spec.jumps.weights[j] * a.V().col(j).dot(phi.segment(static_cast<Eigen::Index>(j) * dims.n, dims.n));
  }
  return h;
}

void HamiltonianGradients::resize(const Dimensions& dims, int marks) {
  y.resize(dims.n);
  Y.resize(dims.m);
  z.resize(dims.zdim());
  Z.resize(dims.Zdim());
  k.resize(dims.m * marks);
  v.resize(dims.r);
}

void eval_hamiltonian_gradients(const ProblemSpec& spec, double t, const StateView& s,
                                const AdjointView& a, const ConstVecRef& v,
                                HamiltonianGradients& out) {
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  thread_local BlockJacobian jb, jsig, jphi, jf, jg;
  thread_local CostGradient lc;
  thread_local Vec Vw;

  eval_coeff_jacobian(spec, Coeff::B, t, s, v, jb);
  eval_coeff_jacobian(spec, Coeff::Sigma, t, s, v, jsig);
  eval_coeff_jacobian(spec, Coeff::Phi, t, s, v, jphi);
  eval_coeff_jacobian(spec, Coeff::F, t, s, v, jf);
  eval_coeff_jacobian(spec, Coeff::G, t, s, v, jg);
  eval_running_cost_gradient(spec, t, s, v, lc);

  // Jump integrands weighted by the measure, flattened to match phi rows.
  Vw.resize(dims.n * J);
  for (int j = 0; j < J; ++j) {
    Vw.segment(static_cast<Eigen::Index>(j) * dims.n, dims.n) =
        spec.jumps.weights[j] * a.V().col(j);
  }

  out.resize(dims, J);
  auto grad = [&](Vec& dst, const Mat& fy, const Mat& by, const Mat& gy, const Mat& sy,
                  const Mat& py, const Vec& ly) {
    dst.noalias() = fy.transpose() * a.p();
    dst.noalias() -= by.transpose() * a.P();
    dst.noalias() += gy.transpose() * vec_q(a);
    dst.noalias() -= sy.transpose() * vec_Q(a);
    dst.noalias() -= py.transpose() * Vw;
    dst -= ly;
  };
  grad(out.y, jf.y, jb.y, jg.y, jsig.y, jphi.y, lc.y);
  grad(out.Y, jf.Y, jb.Y, jg.Y, jsig.Y, jphi.Y, lc.Y);
  grad(out.z, jf.z, jb.z, jg.z, jsig.z, jphi.z, lc.z);
  grad(out.Z, jf.Z, jb.Z, jg.Z, jsig.Z, jphi.Z, lc.Z);
  grad(out.k, jf.k, jb.k, jg.k, jsig.k, jphi.k, lc.k);
  grad(out.v, jf.v, jb.v, jg.v, jsig.v, jphi.v, lc.v);

  // Raw k derivatives to densities.
  for (int j = 0; j < J; ++j) {
    out.k.segment(static_cast<Eigen::Index>(j) * dims.m, dims.m) /= spec.jumps.weights[j];
  }
}

}  // namespace fbdsde
