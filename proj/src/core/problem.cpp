#include "core/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdsde {

namespace {

double fd_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

StateValue copy_state(const StateView& s) {
  StateValue out;
  out.y = s.y();
  out.Y = s.Y();
  out.z = s.z();
  out.Z = s.Z();
  out.k = s.k();
  return out;
}

bool all_finite(const ConstVecRef& v) { return v.allFinite(); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

const CoeffFn& coeff_fn(const CoefficientSet& c, Coeff which) {
  switch (which) {
    case Coeff::B: return c.b;
    case Coeff::Sigma: return c.sigma;
    case Coeff::Phi: return c.phi;
    case Coeff::F: return c.f;
    case Coeff::G: return c.g;
  }
  throw std::logic_error("coeff_fn: bad enum");
}

const CoeffJacFn& coeff_jac_fn(const CoefficientSet& c, Coeff which) {
  switch (which) {
    case Coeff::B: return c.b_jac;
    case Coeff::Sigma: return c.sigma_jac;
    case Coeff::Phi: return c.phi_jac;
    case Coeff::F: return c.f_jac;
    case Coeff::G: return c.g_jac;
  }
  throw std::logic_error("coeff_jac_fn: bad enum");
}

const char* coeff_name(Coeff which) {
  switch (which) {
    case Coeff::B: return "coeffs.b";
    case Coeff::Sigma: return "coeffs.sigma";
    case Coeff::Phi: return "coeffs.phi";
    case Coeff::F: return "coeffs.f";
    case Coeff::G: return "coeffs.g";
  }
  return "coeffs.?";
}

// Central difference of fn over every scalar in the quintuple and control.
void fd_jacobian(const CoeffFn& fn, int rows, const Dimensions& dims, int marks, double t,
                 const StateView& s, const ConstVecRef& v, BlockJacobian& out) {
  out.resize(rows, dims, marks);
  StateValue w = copy_state(s);
  Vec plus(rows), minus(rows);

  auto diff_block = [&](double* base, int count, Mat& target) {
    for (int c = 0; c < count; ++c) {
      const double x0 = base[c];
      const double h = fd_step(x0);
      base[c] = x0 + h;
      fn(t, w.view(), v, plus);
      base[c] = x0 - h;
      fn(t, w.view(), v, minus);
      base[c] = x0;
      target.col(c) = (plus - minus) / (2.0 * h);
    }
  };

  diff_block(w.y.data(), dims.n, out.y);
  diff_block(w.Y.data(), dims.m, out.Y);
  diff_block(w.z.data(), dims.zdim(), out.z);
  diff_block(w.Z.data(), dims.Zdim(), out.Z);
  diff_block(w.k.data(), dims.m * marks, out.k);

  Vec vp = v;
  for (int c = 0; c < dims.r; ++c) {
    const double x0 = vp(c);
    const double h = fd_step(x0);
    vp(c) = x0 + h;
    fn(t, s, vp, plus);
    vp(c) = x0 - h;
    fn(t, s, vp, minus);
    vp(c) = x0;
    out.v.col(c) = (plus - minus) / (2.0 * h);
  }
}

}  // namespace

int coeff_rows(const Dimensions& dims, int marks, Coeff which) {
  switch (which) {
    case Coeff::B: return dims.n;
    case Coeff::Sigma: return dims.n * dims.d;
    case Coeff::Phi: return dims.n * marks;
    case Coeff::F: return dims.m;
    case Coeff::G: return dims.m * dims.l;
  }
  throw std::logic_error("coeff_rows: bad enum");
}

void BlockJacobian::resize(int rows, const Dimensions& dims, int marks) {
  y.resize(rows, dims.n);
  Y.resize(rows, dims.m);
  z.resize(rows, dims.zdim());
  Z.resize(rows, dims.Zdim());
  k.resize(rows, dims.m * marks);
  v.resize(rows, dims.r);
}

void BlockJacobian::set_zero() {
  y.setZero();
  Y.setZero();
  z.setZero();
  Z.setZero();
  k.setZero();
  v.setZero();
}

void CostGradient::resize(const Dimensions& dims, int marks) {
  y.resize(dims.n);
  Y.resize(dims.m);
  z.resize(dims.zdim());
  Z.resize(dims.Zdim());
  k.resize(dims.m * marks);
  v.resize(dims.r);
}

void CostGradient::set_zero() {
  y.setZero();
  Y.setZero();
  z.setZero();
  Z.setZero();
  k.setZero();
  v.setZero();
}

void ProblemSpec::validate() const {
  dims.validate();
  jumps.validate();
  terminal.validate(dims);
  controls.validate(dims.r);
  require(std::isfinite(T) && T > 0.0, "horizon.T: must be finite and positive");
  require(x0.size() == dims.n, "x0: length must equal dims.n");
  require(all_finite(x0), "x0: entries must be finite");

  require(static_cast<bool>(coeffs.b), "coeffs.b: missing");
  require(static_cast<bool>(coeffs.sigma), "coeffs.sigma: missing");
  require(static_cast<bool>(coeffs.phi), "coeffs.phi: missing");
  require(static_cast<bool>(coeffs.f), "coeffs.f: missing");
  require(static_cast<bool>(coeffs.g), "coeffs.g: missing");
  require(static_cast<bool>(cost.running), "cost.running: missing");
  require(static_cast<bool>(cost.terminal), "cost.terminal: missing");
  require(static_cast<bool>(cost.initial), "cost.initial: missing");

  const int J = marks();
  const StateValue zero = StateValue::zero(dims, J);
  const StateView s = zero.view();
  const Vec v = controls.center(dims.r);
  for (double t : {0.0, T}) {
    for (Coeff which : {Coeff::B, Coeff::Sigma, Coeff::Phi, Coeff::F, Coeff::G}) {
      Vec out(coeff_rows(dims, J, which));
      coeff_fn(coeffs, which)(t, s, v, out);
      require(all_finite(out), std::string(coeff_name(which)) + ": non-finite probe value");
    }
    require(std::isfinite(cost.running(t, s, v)), "cost.running: non-finite probe value");
  }
  require(std::isfinite(cost.terminal(Vec::Zero(dims.n))), "cost.terminal: non-finite probe value");
  require(std::isfinite(cost.initial(Vec::Zero(dims.m))), "cost.initial: non-finite probe value");
}

void eval_coeff(const ProblemSpec& spec, Coeff which, double t, const StateView& s,
                const ConstVecRef& v, VecRef out) {
  coeff_fn(spec.coeffs, which)(t, s, v, out);
}

void eval_coeff_jacobian(const ProblemSpec& spec, Coeff which, double t, const StateView& s,
                         const ConstVecRef& v, BlockJacobian& out) {
  const CoeffJacFn& jac = coeff_jac_fn(spec.coeffs, which);
  const int rows = coeff_rows(spec.dims, spec.marks(), which);
  if (jac) {
    out.resize(rows, spec.dims, spec.marks());
    jac(t, s, v, out);
    return;
  }
  fd_jacobian(coeff_fn(spec.coeffs, which), rows, spec.dims, spec.marks(), t, s, v, out);
}

void eval_running_cost_gradient(const ProblemSpec& spec, double t, const StateView& s,
                                const ConstVecRef& v, CostGradient& out) {
  out.resize(spec.dims, spec.marks());
  if (spec.cost.running_grad) {
    spec.cost.running_grad(t, s, v, out);
    return;
  }
  StateValue w = copy_state(s);
  const auto& fn = spec.cost.running;

  auto diff_block = [&](double* base, int count, Vec& target) {
    for (int c = 0; c < count; ++c) {
      const double x0 = base[c];
      const double h = fd_step(x0);
      base[c] = x0 + h;
      const double up = fn(t, w.view(), v);
      base[c] = x0 - h;
      const double dn = fn(t, w.view(), v);
      base[c] = x0;
      target(c) = (up - dn) / (2.0 * h);
    }
  };

  diff_block(w.y.data(), spec.dims.n, out.y);
  diff_block(w.Y.data(), spec.dims.m, out.Y);
  diff_block(w.z.data(), spec.dims.zdim(), out.z);
  diff_block(w.Z.data(), spec.dims.Zdim(), out.Z);
  diff_block(w.k.data(), spec.dims.m * spec.marks(), out.k);

  Vec vp = v;
  for (int c = 0; c < spec.dims.r; ++c) {
    const double x0 = vp(c);
    const double h = fd_step(x0);
    vp(c) = x0 + h;
    const double up = fn(t, s, vp);
    vp(c) = x0 - h;
    const double dn = fn(t, s, vp);
    vp(c) = x0;
    out.v(c) = (up - dn) / (2.0 * h);
  }
}

void eval_terminal_cost_gradient(const ProblemSpec& spec, const ConstVecRef& yT, VecRef out) {
  if (spec.cost.terminal_grad) {
    spec.cost.terminal_grad(yT, out);
    return;
  }
  Vec x = yT;
  for (int c = 0; c < spec.dims.n; ++c) {
    const double x0 = x(c);
    const double h = fd_step(x0);
    x(c) = x0 + h;
    const double up = spec.cost.terminal(x);
    x(c) = x0 - h;
    const double dn = spec.cost.terminal(x);
    x(c) = x0;
    out(c) = (up - dn) / (2.0 * h);
  }
}

void eval_initial_cost_gradient(const ProblemSpec& spec, const ConstVecRef& Y0, VecRef out) {
  if (spec.cost.initial_grad) {
    spec.cost.initial_grad(Y0, out);
    return;
  }
  Vec x = Y0;
  for (int c = 0; c < spec.dims.m; ++c) {
    const double x0 = x(c);
    const double h = fd_step(x0);
    x(c) = x0 + h;
    const double up = spec.cost.initial(x);
    x(c) = x0 - h;
    const double dn = spec.cost.initial(x);
    x(c) = x0;
    out(c) = (up - dn) / (2.0 * h);
  }
}

}  // namespace fbdsde
