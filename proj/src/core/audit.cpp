#include "core/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/hamiltonian.hpp"
#include "core/rng.hpp"

namespace fbdsde {

namespace {

void fill_gaussian(Rng& rng, Vec& v) {
  for (int i = 0; i < v.size(); ++i) v[i] = rng.gaussian();
}

void fill_gaussian(Rng& rng, Mat& m) {
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) m(r, c) = rng.gaussian();
}

void fill_gaussian(Rng& rng, StateValue& s) {
  fill_gaussian(rng, s.y);
  fill_gaussian(rng, s.Y);
  fill_gaussian(rng, s.z);
  fill_gaussian(rng, s.Z);
  fill_gaussian(rng, s.k);
}

Vec random_point_in(Rng& rng, const ControlSet& controls, int r) {
  Vec v(r);
  fill_gaussian(rng, v);
  return controls.project(v);
}

void mean_se(const std::vector<double>& x, double& mean, double& se) {
  const int n = static_cast<int>(x.size());
  mean = 0.0;
  se = 0.0;
  if (n == 0) return;
  for (double xi : x) mean += xi;
  mean /= n;
  if (n < 2) return;
  double ss = 0.0;
  for (double xi : x) ss += (xi - mean) * (xi - mean);
  se = std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
}

struct TwoVarFit {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double rms = 0.0;
};

// min ||mu1 a + mu2 b - r||_2 subject to mu >= 0, by checking the
// unconstrained solution and both single-variable boundaries.
TwoVarFit nnls_two(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& r) {
  double aa = 0, ab = 0, bb = 0, ar = 0, br = 0, rr = 0;
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i) {
    aa += a[i] * a[i];
    ab += a[i] * b[i];
    bb += b[i] * b[i];
    ar += a[i] * r[i];
    br += b[i] * r[i];
    rr += r[i] * r[i];
  }
  auto objective = [&](double m1, double m2) {
    return rr - 2 * m1 * ar - 2 * m2 * br + m1 * m1 * aa + 2 * m1 * m2 * ab + m2 * m2 * bb;
  };
  TwoVarFit best;
  double best_obj = objective(0.0, 0.0);
  auto consider = [&](double m1, double m2) {
    if (!(m1 >= 0.0) || !(m2 >= 0.0)) return;
    double obj = objective(m1, m2);
    if (obj < best_obj) {
      best_obj = obj;
      best.mu1 = m1;
      best.mu2 = m2;
    }
  };
  double det = aa * bb - ab * ab;
  if (det > 1e-14 * std::max(1.0, aa * bb)) {
    consider((ar * bb - br * ab) / det, (br * aa - ar * ab) / det);
  }
  if (aa > 0) consider(ar / aa, 0.0);
  if (bb > 0) consider(0.0, br / bb);
  best.rms = n > 0 ? std::sqrt(std::max(0.0, best_obj) / n) : 0.0;
  return best;
}

}  // namespace

MonotonicityReport audit_monotonicity(const ProblemSpec& spec, int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("audit_monotonicity: need at least two samples");
  spec.validate();
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  const Mat& R = spec.terminal.R;
  Rng rng(seed, 17);

  StateValue s1 = StateValue::zero(dims, J);
  StateValue s2 = StateValue::zero(dims, J);
  Vec f1(dims.m), f2(dims.m), b1(dims.n), b2(dims.n);
  Vec g1(dims.m * dims.l), g2(dims.m * dims.l);
  Vec sg1(dims.n * dims.d), sg2(dims.n * dims.d);
  Vec ph1(dims.n * J), ph2(dims.n * J);
  Mat dz(dims.n, dims.l), dZ(dims.m, dims.d);
  Vec dkj(dims.m), dphj(dims.n);

  std::vector<double> av(samples), bv(samples), brv(samples);
  for (int sidx = 0; sidx < samples; ++sidx) {
    double t = rng.uniform01() * spec.T;
    Vec v = random_point_in(rng, spec.controls, dims.r);
    fill_gaussian(rng, s1);
    fill_gaussian(rng, s2);
    StateView w1 = s1.view();
    StateView w2 = s2.view();
    eval_coeff(spec, Coeff::F, t, w1, v, f1);
    eval_coeff(spec, Coeff::F, t, w2, v, f2);
    eval_coeff(spec, Coeff::B, t, w1, v, b1);
    eval_coeff(spec, Coeff::B, t, w2, v, b2);
    eval_coeff(spec, Coeff::G, t, w1, v, g1);
    eval_coeff(spec, Coeff::G, t, w2, v, g2);
    eval_coeff(spec, Coeff::Sigma, t, w1, v, sg1);
    eval_coeff(spec, Coeff::Sigma, t, w2, v, sg2);
    eval_coeff(spec, Coeff::Phi, t, w1, v, ph1);
    eval_coeff(spec, Coeff::Phi, t, w2, v, ph2);

    Vec dy = s1.y - s2.y;
    Vec dY = s1.Y - s2.Y;
    dz = s1.z - s2.z;
    dZ = s1.Z - s2.Z;
    Vec df = f1 - f2;
    Vec db = b1 - b2;
    Vec Rdy = R * dy;
    Vec RtdY = R.transpose() * dY;
    Mat Rdz = R * dz;
    Mat RtdZ = R.transpose() * dZ;
    Eigen::Map<const Mat> dgm1(g1.data(), dims.m, dims.l);
    Eigen::Map<const Mat> dgm2(g2.data(), dims.m, dims.l);
    Eigen::Map<const Mat> dsm1(sg1.data(), dims.n, dims.d);
    Eigen::Map<const Mat> dsm2(sg2.data(), dims.n, dims.d);

    double bracket = -Rdy.dot(df) + RtdY.dot(db) - (Rdz.array() * (dgm1 - dgm2).array()).sum() +
                     (RtdZ.array() * (dsm1 - dsm2).array()).sum();
    double a = Rdy.squaredNorm() + RtdY.squaredNorm();
    double bsum = Rdz.squaredNorm() + RtdZ.squaredNorm();
    for (int j = 0; j < J; ++j) {
      double wj = spec.jumps.weights[j];
      dkj = s1.k.col(j) - s2.k.col(j);
      dphj = ph1.segment(j * dims.n, dims.n) - ph2.segment(j * dims.n, dims.n);
      bracket += wj * dkj.dot(R * dphj);
      bsum += wj * (R.transpose() * dkj).squaredNorm();
    }
    av[sidx] = a;
    bv[sidx] = bsum;
    brv[sidx] = bracket;
  }

  MonotonicityReport rep;
  rep.samples = samples;
  rep.c = spec.terminal.c;
  rep.bracket_min = *std::min_element(brv.begin(), brv.end());
  rep.bracket_max = *std::max_element(brv.begin(), brv.end());

  bool all_nonpos = true, all_nonneg = true;
  double mass = 0.0;
  for (int i = 0; i < samples; ++i) {
    double tol = 1e-9 * (1.0 + av[i] + bv[i]);
    if (brv[i] > tol) all_nonpos = false;
    if (brv[i] < -tol) all_nonneg = false;
    mass = std::max(mass, av[i] + bv[i]);
  }

  if (mass <= 0.0) {
    rep.regime = "inconclusive";
    return rep;
  }
  const double c = rep.c;
  bool dissipative = all_nonpos && c > 0.0;
  bool expansive = all_nonneg && c < 0.0;
  if (!dissipative && !expansive) {
    rep.regime = "violated";
    return rep;
  }
  rep.regime = dissipative ? "A1" : "A1-prime";

  // Fit moduli on the dominated side, then scale down until
  // mu1 a + mu2 b <= |bracket| holds on every sample.
  std::vector<double> r(samples);
  for (int i = 0; i < samples; ++i) r[i] = dissipative ? -brv[i] : brv[i];
  TwoVarFit fit = nnls_two(av, bv, r);
  rep.fit_residual = fit.rms;
  double mu1 = fit.mu1, mu2 = fit.mu2;
  double scale = 1.0;
  for (int i = 0; i < samples; ++i) {
    double denom = mu1 * av[i] + mu2 * bv[i];
    if (denom > 0.0) scale = std::min(scale, std::max(0.0, r[i] / denom));
  }
  mu1 *= scale;
  mu2 *= scale;
  for (int guard = 0; guard < 64; ++guard) {
    bool feasible = true;
    for (int i = 0; i < samples; ++i) {
      if (mu1 * av[i] + mu2 * bv[i] > r[i] + 1e-12 * (1.0 + std::abs(r[i]))) {
        feasible = false;
        break;
      }
    }
    if (feasible) break;
    mu1 *= 1.0 - 1e-9;
    mu2 *= 1.0 - 1e-9;
  }
  rep.mu1 = mu1;
  rep.mu2 = mu2;
  return rep;
}

ConvexityReport check_cost_convexity(const ProblemSpec& spec, int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("check_cost_convexity: probes must be positive");
  spec.validate();
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  Rng rng(seed, 29);

  ConvexityReport rep;
  rep.probes = probes;
  rep.running_min = std::numeric_limits<double>::infinity();
  rep.terminal_min = std::numeric_limits<double>::infinity();
  rep.initial_min = std::numeric_limits<double>::infinity();
  bool ok = true;

  StateValue s1 = StateValue::zero(dims, J);
  StateValue s2 = StateValue::zero(dims, J);
  StateValue sm = StateValue::zero(dims, J);
  Vec y1(dims.n), y2(dims.n), Y1(dims.m), Y2(dims.m);
  for (int pidx = 0; pidx < probes; ++pidx) {
    double t = rng.uniform01() * spec.T;
    fill_gaussian(rng, s1);
    fill_gaussian(rng, s2);
    Vec v1 = random_point_in(rng, spec.controls, dims.r);
    Vec v2 = random_point_in(rng, spec.controls, dims.r);
    sm.y = 0.5 * (s1.y + s2.y);
    sm.Y = 0.5 * (s1.Y + s2.Y);
    sm.z = 0.5 * (s1.z + s2.z);
    sm.Z = 0.5 * (s1.Z + s2.Z);
    sm.k = 0.5 * (s1.k + s2.k);
    Vec vm = 0.5 * (v1 + v2);
    double l1 = spec.cost.running(t, s1.view(), v1);
    double l2 = spec.cost.running(t, s2.view(), v2);
    double lm = spec.cost.running(t, sm.view(), vm);
    double margin = 0.5 * (l1 + l2) - lm;
    rep.running_min = std::min(rep.running_min, margin);
    if (margin < -1e-9 * (1.0 + std::abs(l1) + std::abs(l2))) ok = false;

    fill_gaussian(rng, y1);
    fill_gaussian(rng, y2);
    double b1 = spec.cost.terminal(y1);
    double b2 = spec.cost.terminal(y2);
    double bm = spec.cost.terminal(0.5 * (y1 + y2));
    margin = 0.5 * (b1 + b2) - bm;
    rep.terminal_min = std::min(rep.terminal_min, margin);
    if (margin < -1e-9 * (1.0 + std::abs(b1) + std::abs(b2))) ok = false;

    fill_gaussian(rng, Y1);
    fill_gaussian(rng, Y2);
    double c1 = spec.cost.initial(Y1);
    double c2 = spec.cost.initial(Y2);
    double cm = spec.cost.initial(0.5 * (Y1 + Y2));
    margin = 0.5 * (c1 + c2) - cm;
    rep.initial_min = std::min(rep.initial_min, margin);
    if (margin < -1e-9 * (1.0 + std::abs(c1) + std::abs(c2))) ok = false;
  }
  rep.convex = ok;
  return rep;
}

ConcavityReport check_hamiltonian_concavity(const ProblemSpec& spec,
                                            const std::vector<std::pair<double, AdjointValue>>& anchors,
                                            int pairs_per_anchor, std::uint64_t seed) {
  if (anchors.empty()) throw std::invalid_argument("check_hamiltonian_concavity: no anchors");
  if (pairs_per_anchor < 1)
    throw std::invalid_argument("check_hamiltonian_concavity: pairs_per_anchor must be positive");
  spec.validate();
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  Rng rng(seed, 31);

  ConcavityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  StateValue s1 = StateValue::zero(dims, J);
  StateValue s2 = StateValue::zero(dims, J);
  StateValue sm = StateValue::zero(dims, J);
  for (const auto& anchor : anchors) {
    AdjointView a = view_of(anchor.second, dims, J);
    for (int pidx = 0; pidx < pairs_per_anchor; ++pidx) {
      fill_gaussian(rng, s1);
      fill_gaussian(rng, s2);
      Vec v1 = random_point_in(rng, spec.controls, dims.r);
      Vec v2 = random_point_in(rng, spec.controls, dims.r);
      sm.y = 0.5 * (s1.y + s2.y);
      sm.Y = 0.5 * (s1.Y + s2.Y);
      sm.z = 0.5 * (s1.z + s2.z);
      sm.Z = 0.5 * (s1.Z + s2.Z);
      sm.k = 0.5 * (s1.k + s2.k);
      Vec vm = 0.5 * (v1 + v2);
      double h1 = eval_hamiltonian(spec, anchor.first, s1.view(), a, v1);
      double h2 = eval_hamiltonian(spec, anchor.first, s2.view(), a, v2);
      double hm = eval_hamiltonian(spec, anchor.first, sm.view(), a, vm);
      double margin = hm - 0.5 * (h1 + h2);
      rep.min_margin = std::min(rep.min_margin, margin);
      if (margin < -1e-9 * (1.0 + std::abs(h1) + std::abs(h2) + std::abs(hm))) ok = false;
      ++rep.probes;
    }
  }
  rep.concave = ok;
  return rep;
}

MaximumConditionReport check_maximum_condition(const ProblemSpec& spec, const StatePaths& state,
                                               const AdjointPaths& adjoint,
                                               const ControlProcess& candidate, int grid_points,
                                               int path_stride, double tol) {
  spec.validate();
  if (grid_points < 1)
    throw std::invalid_argument("check_maximum_condition: grid_points must be positive");
  if (path_stride < 1)
    throw std::invalid_argument("check_maximum_condition: path_stride must be positive");
  if (state.paths != adjoint.paths || state.grid.steps != adjoint.grid.steps)
    throw std::invalid_argument("check_maximum_condition: state and adjoint shapes differ");
  const Dimensions& dims = spec.dims;
  const int N = state.grid.steps;

  // Control grid: a linspace for scalar box controls, projected gaussian
  // draws plus the region's center otherwise.
  std::vector<Vec> grid;
  if (dims.r == 1 && spec.controls.kind == ControlSet::Kind::Box && grid_points > 1) {
    double lo = spec.controls.lo[0], hi = spec.controls.hi[0];
    for (int gidx = 0; gidx < grid_points; ++gidx) {
      Vec v(1);
      v[0] = lo + (hi - lo) * gidx / (grid_points - 1);
      grid.push_back(v);
    }
  } else {
    Rng rng(99, 41);
    grid.push_back(spec.controls.center(dims.r));
    for (int gidx = 1; gidx < grid_points; ++gidx)
      grid.push_back(random_point_in(rng, spec.controls, dims.r));
  }

  MaximumConditionReport rep;
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  rep.worst_control = Vec::Zero(dims.r);
  Vec uval(dims.r);
  for (int i = 0; i < N; ++i) {
    double t = state.grid.t(i);
    for (int p = 0; p < state.paths; p += path_stride) {
      StateView s = state.view(i, p);
      AdjointView a = adjoint.view(i, p);
      candidate.eval(i, s.y(), spec.controls, uval);
      double hu = eval_hamiltonian(spec, t, s, a, uval);
      for (const Vec& v : grid) {
        double gap = eval_hamiltonian(spec, t, s, a, v) - hu;
        ++rep.probes;
        if (gap > rep.worst_gap) {
          rep.worst_gap = gap;
          rep.worst_node = i;
          rep.worst_path = p;
          rep.worst_control = v;
        }
      }
    }
  }
  rep.holds = rep.worst_gap <= tol;
  return rep;
}

namespace {

// J contribution of one path from a solved trajectory.
double path_cost(const ProblemSpec& spec, const ControlProcess& control, const TimeGrid& grid,
                 const StatePaths& state, int p, Vec& uval) {
  double acc = 0.0;
  const double dt = grid.dt();
  for (int i = 0; i < grid.steps; ++i) {
    StateView s = state.view(i, p);
    control.eval(i, s.y(), spec.controls, uval);
    acc += dt * spec.cost.running(grid.t(i), s, uval);
  }
  const Dimensions& dims = spec.dims;
  Eigen::Map<const Vec> yN(state.y.at(grid.steps, p), dims.n);
  Eigen::Map<const Vec> Y0(state.Y.at(0, p), dims.m);
  return acc + spec.cost.terminal(yN) + spec.cost.initial(Y0);
}

}  // namespace

DualityReport check_duality(const ProblemSpec& spec, const ControlProcess& u,
                            const ControlProcess& v, const NoiseBundle& noise,
                            const SolveOptions& opt) {
  spec.validate();
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  const int N = noise.steps;
  const int M = noise.paths;
  TimeGrid grid{spec.T, N};
  const double dt = grid.dt();

  SolveOptions cold = opt;
  cold.warm_start = false;
  StatePaths su, sv;
  solve_fbdsde(spec, u, noise, cold, su);
  solve_fbdsde(spec, v, noise, cold, sv);
  AdjointPaths au;
  solve_adjoint(spec, u, noise, su, cold, au);

  const Mat& R = spec.terminal.R;
  const double c = spec.terminal.c;
  std::vector<double> res_b(M), res_f(M), gap_l(M), gap_r(M);

  Vec uval(dims.r), vval(dims.r);
  Vec fu(dims.m), fv(dims.m), bu(dims.n), bvv(dims.n);
  Vec gu(dims.m * dims.l), gv(dims.m * dims.l);
  Vec sgu(dims.n * dims.d), sgv(dims.n * dims.d);
  Vec phu(dims.n * J), phv(dims.n * J);
  Vec df(dims.m), db(dims.n), dg(dims.m * dims.l), dsg(dims.n * dims.d), dph(dims.n * J);
  Vec dy(dims.n), dY(dims.m), dz(dims.n * dims.l), dZ(dims.m * dims.d), dk(dims.m * J);
  Vec RtpN(dims.n);
  HamiltonianGradients grads;
  grads.resize(dims, J);

  double cancel_worst = 0.0;
  for (int p = 0; p < M; ++p) {
    double sum_b = 0.0, sum_f = 0.0, dl = 0.0, ju = 0.0, jv = 0.0;
    for (int i = 0; i < N; ++i) {
      double t = grid.t(i);
      StateView swu = su.view(i, p);
      StateView swv = sv.view(i, p);
      AdjointView aw = au.view(i, p);
      u.eval(i, swu.y(), spec.controls, uval);
      v.eval(i, swv.y(), spec.controls, vval);

      eval_coeff(spec, Coeff::F, t, swu, uval, fu);
      eval_coeff(spec, Coeff::F, t, swv, vval, fv);
      eval_coeff(spec, Coeff::B, t, swu, uval, bu);
      eval_coeff(spec, Coeff::B, t, swv, vval, bvv);
      eval_coeff(spec, Coeff::G, t, swu, uval, gu);
      eval_coeff(spec, Coeff::G, t, swv, vval, gv);
      eval_coeff(spec, Coeff::Sigma, t, swu, uval, sgu);
      eval_coeff(spec, Coeff::Sigma, t, swv, vval, sgv);
      eval_coeff(spec, Coeff::Phi, t, swu, uval, phu);
      eval_coeff(spec, Coeff::Phi, t, swv, vval, phv);
      eval_hamiltonian_gradients(spec, t, swu, aw, uval, grads);

      df = fv - fu;
      db = bvv - bu;
      dg = gv - gu;
      dsg = sgv - sgu;
      dph = phv - phu;
      dy = Eigen::Map<const Vec>(sv.y.at(i, p), dims.n) -
           Eigen::Map<const Vec>(su.y.at(i, p), dims.n);
      dY = Eigen::Map<const Vec>(sv.Y.at(i, p), dims.m) -
           Eigen::Map<const Vec>(su.Y.at(i, p), dims.m);
      dz = Eigen::Map<const Vec>(sv.z.at(i, p), dims.n * dims.l) -
           Eigen::Map<const Vec>(su.z.at(i, p), dims.n * dims.l);
      dZ = Eigen::Map<const Vec>(sv.Z.at(i, p), dims.m * dims.d) -
           Eigen::Map<const Vec>(su.Z.at(i, p), dims.m * dims.d);
      dk = Eigen::Map<const Vec>(sv.k.at(i, p), dims.m * J) -
           Eigen::Map<const Vec>(su.k.at(i, p), dims.m * J);

      Eigen::Map<const Vec> pi(au.p.at(i, p), dims.m);
      Eigen::Map<const Vec> qi(au.q.at(i, p), dims.m * dims.l);
      Eigen::Map<const Vec> Pi(au.P.at(i, p), dims.n);
      Eigen::Map<const Vec> Qi(au.Q.at(i, p), dims.n * dims.d);
      Eigen::Map<const Vec> Vi(au.V.at(i, p), dims.n * J);

      double jump_b = 0.0, jump_f = 0.0;
      for (int j = 0; j < J; ++j) {
        double wj = spec.jumps.weights[j];
        jump_b += wj * grads.k.segment(j * dims.m, dims.m).dot(dk.segment(j * dims.m, dims.m));
        jump_f += wj * Vi.segment(j * dims.n, dims.n).dot(dph.segment(j * dims.n, dims.n));
      }
      sum_b += dt * (-pi.dot(df) + grads.Y.dot(dY) - qi.dot(dg) + grads.Z.dot(dZ) + jump_b);
      sum_f += dt * (Pi.dot(db) + grads.y.dot(dy) + grads.z.dot(dz) + Qi.dot(dsg) + jump_f);

      double lu = spec.cost.running(t, swu, uval);
      double lv = spec.cost.running(t, swv, vval);
      dl += dt * (lv - lu);
      ju += dt * lu;
      jv += dt * lv;
    }

    Eigen::Map<const Vec> p0(au.p.at(0, p), dims.m);
    Eigen::Map<const Vec> pN(au.p.at(N, p), dims.m);
    Eigen::Map<const Vec> PN(au.P.at(N, p), dims.n);
    dy = Eigen::Map<const Vec>(sv.y.at(N, p), dims.n) -
         Eigen::Map<const Vec>(su.y.at(N, p), dims.n);
    dY = Eigen::Map<const Vec>(sv.Y.at(N, p), dims.m) -
         Eigen::Map<const Vec>(su.Y.at(N, p), dims.m);
    Vec dY0 = Eigen::Map<const Vec>(sv.Y.at(0, p), dims.m) -
              Eigen::Map<const Vec>(su.Y.at(0, p), dims.m);
    RtpN.noalias() = R.transpose() * pN;

    res_b[p] = -p0.dot(dY0) - (-pN.dot(dY) + sum_b);
    res_f[p] = PN.dot(dy) - sum_f;
    cancel_worst = std::max(cancel_worst, std::abs(c * RtpN.dot(dy) - pN.dot(dY)));

    Eigen::Map<const Vec> yuN(su.y.at(N, p), dims.n);
    Eigen::Map<const Vec> yvN(sv.y.at(N, p), dims.n);
    Eigen::Map<const Vec> Yu0(su.Y.at(0, p), dims.m);
    Eigen::Map<const Vec> Yv0(sv.Y.at(0, p), dims.m);
    ju += spec.cost.terminal(yuN) + spec.cost.initial(Yu0);
    jv += spec.cost.terminal(yvN) + spec.cost.initial(Yv0);
    gap_l[p] = jv - ju;
    gap_r[p] = PN.dot(dy) + c * RtpN.dot(dy) - p0.dot(dY0) + dl;
  }

  DualityReport rep;
  rep.paths = M;
  rep.terminal_cancellation = cancel_worst;
  mean_se(res_b, rep.backward_residual, rep.backward_se);
  mean_se(res_f, rep.forward_residual, rep.forward_se);
  double se_l = 0.0;
  std::vector<double> gap_diff(M);
  for (int p = 0; p < M; ++p) gap_diff[p] = gap_l[p] - gap_r[p];
  mean_se(gap_l, rep.gap_lhs, se_l);
  mean_se(gap_r, rep.gap_rhs, se_l);
  double diff_mean = 0.0;
  mean_se(gap_diff, diff_mean, rep.gap_margin_se);
  return rep;
}

SufficiencyReport certify_control(const ProblemSpec& spec, const ControlProcess& candidate,
                                  const NoiseBundle& noise, const CertifyOptions& opt) {
  spec.validate();
  const Dimensions& dims = spec.dims;
  const int J = spec.marks();
  const int N = noise.steps;
  const int M = noise.paths;
  TimeGrid grid{spec.T, N};

  SufficiencyReport rep;
  StatePaths state;
  SolveReport sr = solve_fbdsde(spec, candidate, noise, opt.solve, state);
  AdjointPaths adj;
  SolveReport ar = solve_adjoint(spec, candidate, noise, state, opt.solve, adj);
  rep.solver_converged = sr.converged && ar.converged;
  if (!sr.converged) rep.warnings.push_back("state solve did not converge; verdict is inconclusive");
  if (!ar.converged)
    rep.warnings.push_back("adjoint solve did not converge; verdict is inconclusive");

  rep.max_condition = check_maximum_condition(spec, state, adj, candidate, opt.grid_points,
                                              opt.path_stride, opt.max_condition_tol);
  rep.candidate_critical = rep.max_condition.holds;
  if (!rep.max_condition.holds)
    rep.warnings.push_back("a grid control beats the candidate Hamiltonian at some sample");

  // Concavity anchors drawn from the solved adjoint cloud.
  Rng rng(opt.seed, 37);
  int anchor_count = std::min(64, std::max(1, opt.shape_probes / 4));
  std::vector<std::pair<double, AdjointValue>> anchors;
  anchors.reserve(anchor_count);
  for (int aidx = 0; aidx < anchor_count; ++aidx) {
    int i = static_cast<int>(rng.uniform01() * N);
    int p = static_cast<int>(rng.uniform01() * M);
    i = std::min(i, N - 1);
    p = std::min(p, M - 1);
    AdjointValue val = AdjointValue::zero(dims, J);
    val.p = Eigen::Map<const Vec>(adj.p.at(i, p), dims.m);
    val.P = Eigen::Map<const Vec>(adj.P.at(i, p), dims.n);
    val.q = Eigen::Map<const Mat>(adj.q.at(i, p), dims.m, dims.l);
    val.Q = Eigen::Map<const Mat>(adj.Q.at(i, p), dims.n, dims.d);
    val.V = Eigen::Map<const Mat>(adj.V.at(i, p), dims.n, J);
    anchors.emplace_back(grid.t(i), std::move(val));
  }
  rep.concavity = check_hamiltonian_concavity(spec, anchors, 4, opt.seed + 1);
  rep.hamiltonian_concave = rep.concavity.concave;
  if (!rep.concavity.concave)
    rep.warnings.push_back("Hamiltonian midpoint concavity failed at a probe");

  rep.convexity = check_cost_convexity(spec, opt.shape_probes, opt.seed + 2);
  rep.cost_convex = rep.convexity.convex;
  if (!rep.convexity.convex) rep.warnings.push_back("cost midpoint convexity failed at a probe");

  rep.monotonicity = audit_monotonicity(spec, opt.monotonicity_samples, opt.seed + 3);
  if (rep.monotonicity.regime != "A1" && rep.monotonicity.regime != "A1-prime")
    rep.warnings.push_back(
        "coupling monotonicity not confirmed on sampled increments; the solvability "
        "guarantee behind the certificate may not apply");

  // Cost-gap probes: J(v) - J(u) >= -E sum dt <H_v(u), v - u> for perturbed
  // controls on the same noise.
  rep.min_gap_margin = std::numeric_limits<double>::infinity();
  bool gaps_ok = true;
  if (opt.gap_probes > 0 && candidate.kind() == ControlProcess::Kind::OpenLoop) {
    // Path-mean H_v per node along the candidate solution.
    Mat hv_bar = Mat::Zero(dims.r, N);
    HamiltonianGradients grads;
    grads.resize(dims, J);
    Vec uval(dims.r);
    for (int i = 0; i < N; ++i) {
      for (int p = 0; p < M; ++p) {
        StateView s = state.view(i, p);
        candidate.eval(i, s.y(), spec.controls, uval);
        eval_hamiltonian_gradients(spec, grid.t(i), s, adj.view(i, p), uval, grads);
        hv_bar.col(i) += grads.v;
      }
      hv_bar.col(i) /= M;
    }

    std::vector<double> ju(M), jv(M);
    Vec uscratch(dims.r);
    for (int p = 0; p < M; ++p) ju[p] = path_cost(spec, candidate, grid, state, p, uscratch);

    for (int probe = 0; probe < opt.gap_probes; ++probe) {
      Vec delta(dims.r);
      for (int c0 = 0; c0 < dims.r; ++c0) {
        double width = 0.5;
        if (spec.controls.kind == ControlSet::Kind::Box)
          width = 0.5 * (spec.controls.hi[c0] - spec.controls.lo[c0]);
        delta[c0] = (2.0 * rng.uniform01() - 1.0) * width;
      }
      Mat vvals = candidate.values();
      for (int i = 0; i < vvals.cols(); ++i)
        vvals.col(i) = spec.controls.project(vvals.col(i) + delta);
      ControlProcess vproc = ControlProcess::open_loop(vvals);

      StatePaths pstate;
      solve_fbdsde(spec, vproc, noise, opt.solve, pstate);
      for (int p = 0; p < M; ++p) jv[p] = path_cost(spec, vproc, grid, pstate, p, uscratch);

      double bound = 0.0;
      for (int i = 0; i < N; ++i)
        bound -= grid.dt() * hv_bar.col(i).dot(vvals.col(i) - candidate.values().col(i));

      std::vector<double> diff(M);
      for (int p = 0; p < M; ++p) diff[p] = jv[p] - ju[p];
      double gap_mean = 0.0, gap_se = 0.0;
      mean_se(diff, gap_mean, gap_se);
      double margin = gap_mean - bound;
      rep.min_gap_margin = std::min(rep.min_gap_margin, margin);
      if (margin < -(3.0 * gap_se + 0.02)) gaps_ok = false;
    }
  } else if (opt.gap_probes > 0) {
    rep.warnings.push_back("cost-gap probes skipped for feedback candidate controls");
    rep.min_gap_margin = 0.0;
  } else {
    rep.min_gap_margin = 0.0;
  }
  rep.gap_probes_pass = gaps_ok;
  if (!gaps_ok) rep.warnings.push_back("a perturbed control undercut the duality gap bound");

  rep.verdict = rep.solver_converged && rep.candidate_critical && rep.hamiltonian_concave &&
                rep.cost_convex && rep.gap_probes_pass;
  return rep;
}

}  // namespace fbdsde
