#include "core/lq.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace fbdsde {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_shape(const Mat& a, int rows, int cols, const std::string& key) {
  require(a.rows() == rows && a.cols() == cols,
          key + ": expected " + std::to_string(rows) + " x " + std::to_string(cols));
  require(a.allFinite(), key + ": entries must be finite");
}

void check_len(const Vec& a, int rows, const std::string& key) {
  require(a.size() == rows, key + ": expected length " + std::to_string(rows));
  require(a.allFinite(), key + ": entries must be finite");
}

void check_symmetric(const Mat& a, const std::string& key) {
  require(a.isApprox(a.transpose(), 1e-12), key + ": must be symmetric");
}

Eigen::Map<const Vec> vec_z(const StateView& s) { return {s.z_ptr, s.n * s.l}; }
Eigen::Map<const Vec> vec_Z(const StateView& s) { return {s.Z_ptr, s.m * s.d}; }

Eigen::Map<const Vec> weights_of(const JumpMeasure& jumps) {
  return {jumps.weights.data(), jumps.count()};
}

// Integral of the jump integrand against the driving measure, k w in R^m.
const Vec& k_integral(const StateView& s, const JumpMeasure& jumps) {
  thread_local Vec kint;
  kint.resize(s.m);
  kint.noalias() = s.k() * weights_of(jumps);
  return kint;
}

void eval_affine(const AffineBlocks& a, double t, const StateView& s, const ConstVecRef& v,
                 const Vec& kint, VecRef out) {
  out = a.c0 + t * a.c1;
  out.noalias() += a.Ay * s.y();
  out.noalias() += t * (a.By * s.y());
  out.noalias() += a.AY * s.Y();
  out.noalias() += t * (a.BY * s.Y());
  out.noalias() += a.Az * vec_z(s);
  out.noalias() += t * (a.Bz * vec_z(s));
  out.noalias() += a.AZ * vec_Z(s);
  out.noalias() += t * (a.BZ * vec_Z(s));
  out.noalias() += a.Ak * kint;
  out.noalias() += t * (a.Bk * kint);
  out.noalias() += a.Av * v;
  out.noalias() += t * (a.Bv * v);
}

void affine_jacobian(const AffineBlocks& a, const JumpMeasure& jumps, double t,
                     BlockJacobian& out) {
  const int m = static_cast<int>(a.Ak.cols());
  out.y = a.Ay + t * a.By;
  out.Y = a.AY + t * a.BY;
  out.z = a.Az + t * a.Bz;
  out.Z = a.AZ + t * a.BZ;
  out.v = a.Av + t * a.Bv;
  const Mat Ak = a.Ak + t * a.Bk;
  for (int j = 0; j < jumps.count(); ++j) {
    out.k.middleCols(static_cast<Eigen::Index>(j) * m, m) = jumps.weights[j] * Ak;
  }
}

}  // namespace

AffineBlocks AffineBlocks::zero(int rows, const Dimensions& dims) {
  AffineBlocks a;
  a.Ay = Mat::Zero(rows, dims.n);
  a.AY = Mat::Zero(rows, dims.m);
  a.Az = Mat::Zero(rows, dims.zdim());
  a.AZ = Mat::Zero(rows, dims.Zdim());
  a.Ak = Mat::Zero(rows, dims.m);
  a.Av = Mat::Zero(rows, dims.r);
  a.By = a.Ay;
  a.BY = a.AY;
  a.Bz = a.Az;
  a.BZ = a.AZ;
  a.Bk = a.Ak;
  a.Bv = a.Av;
  a.c0 = Vec::Zero(rows);
  a.c1 = Vec::Zero(rows);
  return a;
}

void AffineBlocks::validate(int rows, const Dimensions& dims, const std::string& key) const {
  check_shape(Ay, rows, dims.n, key + ".Ay");
  check_shape(AY, rows, dims.m, key + ".AY");
  check_shape(Az, rows, dims.zdim(), key + ".Az");
  check_shape(AZ, rows, dims.Zdim(), key + ".AZ");
  check_shape(Ak, rows, dims.m, key + ".Ak");
  check_shape(Av, rows, dims.r, key + ".Av");
  check_shape(By, rows, dims.n, key + ".By");
  check_shape(BY, rows, dims.m, key + ".BY");
  check_shape(Bz, rows, dims.zdim(), key + ".Bz");
  check_shape(BZ, rows, dims.Zdim(), key + ".BZ");
  check_shape(Bk, rows, dims.m, key + ".Bk");
  check_shape(Bv, rows, dims.r, key + ".Bv");
  check_len(c0, rows, key + ".c0");
  check_len(c1, rows, key + ".c1");
}

JumpBlocks JumpBlocks::zero(const Dimensions& dims) {
  JumpBlocks j;
  j.base = AffineBlocks::zero(dims.n, dims);
  j.rho = AffineBlocks::zero(dims.n, dims);
  j.kmark = Mat::Zero(dims.n, dims.m);
  return j;
}

void JumpBlocks::validate(const Dimensions& dims) const {
  base.validate(dims.n, dims, "lq.phi.base");
  rho.validate(dims.n, dims, "lq.phi.rho");
  check_shape(kmark, dims.n, dims.m, "lq.phi.kmark");
}

LqCost LqCost::zero(const Dimensions& dims) {
  LqCost c;
  c.Qy = Mat::Zero(dims.n, dims.n);
  c.QY = Mat::Zero(dims.m, dims.m);
  c.Qz = Mat::Zero(dims.zdim(), dims.zdim());
  c.QZ = Mat::Zero(dims.Zdim(), dims.Zdim());
  c.Qk = Mat::Zero(dims.m, dims.m);
  c.Qv = Mat::Zero(dims.r, dims.r);
  c.ly = Vec::Zero(dims.n);
  c.lY = Vec::Zero(dims.m);
  c.lz = Vec::Zero(dims.zdim());
  c.lZ = Vec::Zero(dims.Zdim());
  c.lk = Vec::Zero(dims.m);
  c.lv = Vec::Zero(dims.r);
  c.beta_Q = Mat::Zero(dims.n, dims.n);
  c.beta_l = Vec::Zero(dims.n);
  c.gamma_Q = Mat::Zero(dims.m, dims.m);
  c.gamma_l = Vec::Zero(dims.m);
  return c;
}

void LqCost::validate(const Dimensions& dims) const {
  check_shape(Qy, dims.n, dims.n, "cost.Qy");
  check_shape(QY, dims.m, dims.m, "cost.QY");
  check_shape(Qz, dims.zdim(), dims.zdim(), "cost.Qz");
  check_shape(QZ, dims.Zdim(), dims.Zdim(), "cost.QZ");
  check_shape(Qk, dims.m, dims.m, "cost.Qk");
  check_shape(Qv, dims.r, dims.r, "cost.Qv");
  for (const auto* q : {&Qy, &QY, &Qz, &QZ, &Qk, &Qv}) check_symmetric(*q, "cost quadratic");
  check_len(ly, dims.n, "cost.ly");
  check_len(lY, dims.m, "cost.lY");
  check_len(lz, dims.zdim(), "cost.lz");
  check_len(lZ, dims.Zdim(), "cost.lZ");
  check_len(lk, dims.m, "cost.lk");
  check_len(lv, dims.r, "cost.lv");
  require(std::isfinite(lconst), "cost.lconst: must be finite");
  check_shape(beta_Q, dims.n, dims.n, "cost.beta.Q");
  check_symmetric(beta_Q, "cost.beta.Q");
  check_len(beta_l, dims.n, "cost.beta.l");
  require(std::isfinite(beta_c), "cost.beta.c: must be finite");
  check_shape(gamma_Q, dims.m, dims.m, "cost.gamma.Q");
  check_symmetric(gamma_Q, "cost.gamma.Q");
  check_len(gamma_l, dims.m, "cost.gamma.l");
  require(std::isfinite(gamma_c), "cost.gamma.c: must be finite");
}

LqProblem LqProblem::zero(const Dimensions& dims, JumpMeasure jumps) {
  LqProblem lq;
  lq.dims = dims;
  lq.jumps = std::move(jumps);
  lq.terminal.c = 1.0;
  lq.terminal.R = Mat::Identity(dims.m, dims.n);
  lq.terminal.xi = Vec::Zero(dims.m);
  lq.x0 = Vec::Zero(dims.n);
  lq.controls.kind = ControlSet::Kind::Box;
  lq.controls.lo = Vec::Constant(dims.r, -1.0);
  lq.controls.hi = Vec::Constant(dims.r, 1.0);
  lq.b = AffineBlocks::zero(dims.n, dims);
  lq.sigma = AffineBlocks::zero(dims.n * dims.d, dims);
  lq.phi = JumpBlocks::zero(dims);
  lq.f = AffineBlocks::zero(dims.m, dims);
  lq.g = AffineBlocks::zero(dims.m * dims.l, dims);
  lq.cost = LqCost::zero(dims);
  return lq;
}

void LqProblem::validate() const {
  dims.validate();
  jumps.validate();
  terminal.validate(dims);
  controls.validate(dims.r);
  require(std::isfinite(T) && T > 0.0, "horizon.T: must be finite and positive");
  check_len(x0, dims.n, "x0");
  b.validate(dims.n, dims, "lq.b");
  sigma.validate(dims.n * dims.d, dims, "lq.sigma");
  phi.validate(dims);
  f.validate(dims.m, dims, "lq.f");
  g.validate(dims.m * dims.l, dims, "lq.g");
  cost.validate(dims);
}

ProblemSpec build_lq_problem(const LqProblem& lq) {
  lq.validate();
  auto data = std::make_shared<const LqProblem>(lq);

  ProblemSpec spec;
  spec.name = lq.name;
  spec.dims = lq.dims;
  spec.jumps = lq.jumps;
  spec.T = lq.T;
  spec.terminal = lq.terminal;
  spec.x0 = lq.x0;
  spec.controls = lq.controls;

  auto affine_eval = [data](const AffineBlocks& blocks) {
    return [data, &blocks](double t, const StateView& s, const ConstVecRef& v, VecRef out) {
      eval_affine(blocks, t, s, v, k_integral(s, data->jumps), out);
    };
  };
  spec.coeffs.b = affine_eval(data->b);
  spec.coeffs.sigma = affine_eval(data->sigma);
  spec.coeffs.f = affine_eval(data->f);
  spec.coeffs.g = affine_eval(data->g);

  spec.coeffs.phi = [data](double t, const StateView& s, const ConstVecRef& v, VecRef out) {
    const int n = data->dims.n;
    const int J = data->jumps.count();
    thread_local Vec base, slope;
    base.resize(n);
    slope.resize(n);
    const Vec& kint = k_integral(s, data->jumps);
    eval_affine(data->phi.base, t, s, v, kint, base);
    eval_affine(data->phi.rho, t, s, v, kint, slope);
    for (int j = 0; j < J; ++j) {
      auto seg = out.segment(static_cast<Eigen::Index>(j) * n, n);
      seg = base + data->jumps.marks[j] * slope;
      seg.noalias() += data->phi.kmark * s.k().col(j);
    }
  };

  auto affine_jac = [data](const AffineBlocks& blocks, int rows) {
    return [data, &blocks, rows](double t, const StateView&, const ConstVecRef&,
                                 BlockJacobian& out) {
      out.resize(rows, data->dims, data->jumps.count());
      affine_jacobian(blocks, data->jumps, t, out);
    };
  };
  spec.coeffs.b_jac = affine_jac(data->b, lq.dims.n);
  spec.coeffs.sigma_jac = affine_jac(data->sigma, lq.dims.n * lq.dims.d);
  spec.coeffs.f_jac = affine_jac(data->f, lq.dims.m);
  spec.coeffs.g_jac = affine_jac(data->g, lq.dims.m * lq.dims.l);

  spec.coeffs.phi_jac = [data](double t, const StateView&, const ConstVecRef&,
                               BlockJacobian& out) {
    const Dimensions& dims = data->dims;
    const int n = dims.n;
    const int m = dims.m;
    const int J = data->jumps.count();
    out.resize(n * J, dims, J);
    thread_local BlockJacobian base, rho;
    base.resize(n, dims, J);
    rho.resize(n, dims, J);
    affine_jacobian(data->phi.base, data->jumps, t, base);
    affine_jacobian(data->phi.rho, data->jumps, t, rho);
    for (int j = 0; j < J; ++j) {
      const double rj = data->jumps.marks[j];
      const Eigen::Index row = static_cast<Eigen::Index>(j) * n;
      out.y.middleRows(row, n) = base.y + rj * rho.y;
      out.Y.middleRows(row, n) = base.Y + rj * rho.Y;
      out.z.middleRows(row, n) = base.z + rj * rho.z;
      out.Z.middleRows(row, n) = base.Z + rj * rho.Z;
      out.k.middleRows(row, n) = base.k + rj * rho.k;
      out.v.middleRows(row, n) = base.v + rj * rho.v;
      out.k.block(row, static_cast<Eigen::Index>(j) * m, n, m) += data->phi.kmark;
    }
  };
  spec.coeffs.jacobians_state_independent = true;

  spec.cost.running = [data](double t, const StateView& s, const ConstVecRef& v) -> double {
    (void)t;
    const LqCost& c = data->cost;
    double acc = c.lconst;
    acc += 0.5 * s.y().dot(c.Qy * s.y()) + c.ly.dot(s.y());
    acc += 0.5 * s.Y().dot(c.QY * s.Y()) + c.lY.dot(s.Y());
    acc += 0.5 * vec_z(s).dot(c.Qz * vec_z(s)) + c.lz.dot(vec_z(s));
    acc += 0.5 * vec_Z(s).dot(c.QZ * vec_Z(s)) + c.lZ.dot(vec_Z(s));
    for (int j = 0; j < data->jumps.count(); ++j) {
      const auto kj = s.k().col(j);
      acc += data->jumps.weights[j] * (0.5 * kj.dot(c.Qk * kj) + c.lk.dot(kj));
    }
    acc += 0.5 * v.dot(c.Qv * v) + c.lv.dot(v);
    return acc;
  };

  spec.cost.running_grad = [data](double, const StateView& s, const ConstVecRef& v,
                                  CostGradient& out) {
    const LqCost& c = data->cost;
    const Dimensions& dims = data->dims;
    out.y.noalias() = c.Qy * s.y();
    out.y += c.ly;
    out.Y.noalias() = c.QY * s.Y();
    out.Y += c.lY;
    out.z.noalias() = c.Qz * vec_z(s);
    out.z += c.lz;
    out.Z.noalias() = c.QZ * vec_Z(s);
    out.Z += c.lZ;
    for (int j = 0; j < data->jumps.count(); ++j) {
      auto seg = out.k.segment(static_cast<Eigen::Index>(j) * dims.m, dims.m);
      seg.noalias() = c.Qk * s.k().col(j);
      seg += c.lk;
      seg *= data->jumps.weights[j];
    }
    out.v.noalias() = c.Qv * v;
    out.v += c.lv;
  };

  spec.cost.terminal = [data](const ConstVecRef& yT) -> double {
    const LqCost& c = data->cost;
    return 0.5 * yT.dot(c.beta_Q * yT) + c.beta_l.dot(yT) + c.beta_c;
  };
  spec.cost.terminal_grad = [data](const ConstVecRef& yT, VecRef out) {
    out.noalias() = data->cost.beta_Q * yT;
    out += data->cost.beta_l;
  };
  spec.cost.initial = [data](const ConstVecRef& Y0) -> double {
    const LqCost& c = data->cost;
    return 0.5 * Y0.dot(c.gamma_Q * Y0) + c.gamma_l.dot(Y0) + c.gamma_c;
  };
  spec.cost.initial_grad = [data](const ConstVecRef& Y0, VecRef out) {
    out.noalias() = data->cost.gamma_Q * Y0;
    out += data->cost.gamma_l;
  };

  return spec;
}

}  // namespace fbdsde
