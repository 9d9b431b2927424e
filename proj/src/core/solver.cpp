#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core/norms.hpp"
#include "core/regression.hpp"

namespace fbdsde {

namespace {

void check_compat(const SystemDynamics& sys, const NoiseBundle& noise) {
  const Dimensions& dims = sys.dims();
  if (noise.wdim != dims.d || noise.bdim != dims.l) {
    throw std::invalid_argument("solver: noise dimensions do not match the system");
  }
  if (noise.jumps.count() != sys.jumps().count()) {
    throw std::invalid_argument("solver: jump measure does not match the system");
  }
  if (noise.steps < 1 || noise.paths < 1) {
    throw std::invalid_argument("solver: noise bundle is empty");
  }
}

void check_options(const SolveOptions& opt) {
  if (!(opt.theta > 0.0) || opt.theta > 1.0) {
    throw std::invalid_argument("solver: theta must lie in (0, 1]");
  }
  if (opt.max_iter < 1) throw std::invalid_argument("solver: max_iter must be positive");
  if (!(opt.tol >= 0.0)) throw std::invalid_argument("solver: tol must be nonnegative");
  if (opt.basis_degree < 1) throw std::invalid_argument("solver: basis_degree must be positive");
}

StateView compose_view(const PathArray& y, const StatePaths& backward, int i, int p,
                       const Dimensions& dims, int J) {
  return {y.at(i, p),          backward.Y.at(i, p), backward.z.at(i, p), backward.Z.at(i, p),
          backward.k.at(i, p), dims.n,              dims.m,              dims.l,
          dims.d,              J};
}

// Forward Euler pass writing `haty`; the backward components (and z at the
// right node for the backward-noise correction) come from `base` and stay
// fixed. The optional cache keeps b dt + sigma dW + phi dN per (step, path)
// so the sweep can recover the z residual without re-evaluating coefficients.
void forward_pass(const SystemDynamics& sys, const NoiseBundle& noise, const TimeGrid& grid,
                  const StatePaths& base, PathArray& haty, PathArray* inc) {
  const Dimensions& dims = sys.dims();
  const int N = noise.steps;
  const int M = noise.paths;
  const int n = dims.n, l = dims.l, d = dims.d;
  const int J = sys.jumps().count();
  const double dt = grid.dt();

  Vec b(n), sig(n * d), phi(n * J), step(n);
  for (int p = 0; p < M; ++p) {
    auto y0 = haty.vec(0, p);
    sys.initial_state(p, y0);
  }
  for (int i = 0; i < N; ++i) {
    const double t = grid.t(i);
    for (int p = 0; p < M; ++p) {
      const StateView s = compose_view(haty, base, i, p, dims, J);
      sys.eval_b(i, p, t, s, b);
      sys.eval_sigma(i, p, t, s, sig);
      sys.eval_phi(i, p, t, s, phi);
      Eigen::Map<const Vec> dW(noise.dW_at(i, p), d);
      Eigen::Map<const Vec> dB(noise.dB_at(i, p), l);
      Eigen::Map<const Vec> dN(noise.dN_at(i, p), J);
      step = dt * b;
      step.noalias() += Eigen::Map<const Mat>(sig.data(), n, d) * dW;
      step.noalias() += Eigen::Map<const Mat>(phi.data(), n, J) * dN;
      if (inc) inc->vec(i, p) = step;
      auto next = haty.vec(i + 1, p);
      next = haty.vec(i, p) + step;
      next.noalias() -= base.z.mat(i + 1, p, n, l) * dB;
    }
  }
}

struct SweepDiag {
  double max_condition = 0.0;
  int min_rank = -1;
  int worst_node = -1;

  void note(const NodeRegression& reg) {
    if (reg.condition() > max_condition) {
      max_condition = reg.condition();
      worst_node = reg.node();
    }
    if (min_rank < 0 || reg.rank() < min_rank) min_rank = reg.rank();
  }
};

void fill_design(const SystemDynamics& sys, const NoiseBundle& noise, const RegressionBasis& basis,
                 const PathArray& haty, int i, Mat& design, std::vector<double>& vars,
                 std::vector<double>& row) {
  const int n = sys.dims().n;
  const int l = sys.dims().l;
  const int e = sys.extra_vars();
  const int count = n + l + e;
  for (int p = 0; p < noise.paths; ++p) {
    const double* y = haty.at(i, p);
    std::copy(y, y + n, vars.data());
    const double* bt = noise.btail_at(i, p);
    std::copy(bt, bt + l, vars.data() + n);
    if (e > 0) sys.extra(i, p, vars.data() + n + l);
    basis.fill_row(vars.data(), count, row.data());
    for (Eigen::Index c = 0; c < design.cols(); ++c) design(p, c) = row[static_cast<size_t>(c)];
  }
}

// One backward regression sweep. hat.y must hold the forward pass; writes
// hat.Y, hat.Z, hat.k and, when fit_z, hat.z. Coefficients evaluate with the
// new forward state but the backward arguments frozen at `base`.
void backward_sweep(const SystemDynamics& sys, const NoiseBundle& noise, const TimeGrid& grid,
                    const RegressionBasis& basis, const StatePaths& base, const PathArray* inc,
                    bool fit_z, StatePaths& hat, SweepDiag& diag) {
  const Dimensions& dims = sys.dims();
  const int N = noise.steps;
  const int M = noise.paths;
  const int n = dims.n, m = dims.m, l = dims.l, d = dims.d;
  const int J = sys.jumps().count();
  const double dt = grid.dt();

  const int vars = n + l + sys.extra_vars();
  const int F = basis.features(vars);
  std::vector<double> var_scratch(vars), row_scratch(F);
  Mat design(M, F);

  NodeRegression reg_right;  // factorization at node i+1, kept across steps
  NodeRegression reg_here;

  Vec shift(m);
  const Mat& R = sys.terminal_R();
  const double tc = sys.terminal_c();
  for (int p = 0; p < M; ++p) {
    sys.terminal_shift(p, shift);
    hat.Y.vec(N, p) = tc * (R * hat.y.vec(N, p)) + shift;
  }

  if (fit_z) {
    fill_design(sys, noise, basis, hat.y, N, design, var_scratch, row_scratch);
    reg_right.factorize(design, N);
    diag.note(reg_right);
  }

  Mat ctarget(M, m), cfit(M, m);
  const int zk_cols = m * d + m * J + m;  // Z block, k block, Y recursion
  Mat big(M, zk_cols), bigfit(M, zk_cols);
  Mat ztarget, zfit;
  if (fit_z) {
    ztarget.resize(M, n * l);
    zfit.resize(M, n * l);
  }

  Vec fvec(m), gvec(m * l), resid(m), target(m), eps(n);

  for (int i = N - 1; i >= 0; --i) {
    fill_design(sys, noise, basis, hat.y, i, design, var_scratch, row_scratch);
    reg_here.factorize(design, i);
    diag.note(reg_here);

    // Conditional mean of the next backward value: the control variate that
    // keeps the dW and jump estimators from fitting projection noise.
    for (int p = 0; p < M; ++p) ctarget.row(p) = hat.Y.vec(i + 1, p).transpose();
    reg_here.fit(ctarget, cfit);

    const double ti = grid.t(i);
    const double tnext = grid.t(i + 1);
    for (int p = 0; p < M; ++p) {
      Eigen::Map<const Vec> dW(noise.dW_at(i, p), d);
      Eigen::Map<const Vec> dB(noise.dB_at(i, p), l);
      Eigen::Map<const Vec> dN(noise.dN_at(i, p), J);

      resid = hat.Y.vec(i + 1, p) - cfit.row(p).transpose();

      auto brow = big.row(p);
      for (int cd = 0; cd < d; ++cd) {
        for (int a = 0; a < m; ++a) brow(cd * m + a) = resid(a) * dW(cd) / dt;
      }
      for (int j = 0; j < J; ++j) {
        const double scale = dN(j) / (noise.jumps.weights[static_cast<size_t>(j)] * dt);
        for (int a = 0; a < m; ++a) brow(m * d + j * m + a) = resid(a) * scale;
      }

      const StateView si = compose_view(hat.y, base, i, p, dims, J);
      sys.eval_f(i, p, ti, si, fvec);
      const StateView snext = compose_view(hat.y, base, i + 1, p, dims, J);
      sys.eval_g(i + 1, p, tnext, snext, gvec);
      target = hat.Y.vec(i + 1, p) + dt * fvec;
      target.noalias() += Eigen::Map<const Mat>(gvec.data(), m, l) * dB;
      for (int a = 0; a < m; ++a) brow(m * d + m * J + a) = target(a);
    }
    reg_here.fit(big, bigfit);
    for (int p = 0; p < M; ++p) {
      double* Zp = hat.Z.at(i, p);
      double* kp = hat.k.at(i, p);
      double* Yp = hat.Y.at(i, p);
      for (int c = 0; c < m * d; ++c) Zp[c] = bigfit(p, c);
      for (int c = 0; c < m * J; ++c) kp[c] = bigfit(p, m * d + c);
      for (int a = 0; a < m; ++a) Yp[a] = bigfit(p, m * d + m * J + a);
    }

    if (fit_z) {
      // The forward residual is exactly -z(i+1) dB by construction; project
      // it at the right node, where the integrand lives.
      for (int p = 0; p < M; ++p) {
        Eigen::Map<const Vec> dB(noise.dB_at(i, p), l);
        eps = hat.y.vec(i + 1, p) - hat.y.vec(i, p) - inc->vec(i, p);
        auto zrow = ztarget.row(p);
        for (int cl = 0; cl < l; ++cl) {
          for (int a = 0; a < n; ++a) zrow(cl * n + a) = -eps(a) * dB(cl) / dt;
        }
      }
      reg_right.fit(ztarget, zfit);
      for (int p = 0; p < M; ++p) {
        double* zp = hat.z.at(i + 1, p);
        for (int c = 0; c < n * l; ++c) zp[c] = zfit(p, c);
      }
      reg_right = std::move(reg_here);
    }
  }

  // Grid ends the recursion does not pin down.
  for (int p = 0; p < M; ++p) {
    if (fit_z) std::copy(hat.z.at(1, p), hat.z.at(1, p) + n * l, hat.z.at(0, p));
    std::copy(hat.Z.at(N - 1, p), hat.Z.at(N - 1, p) + m * d, hat.Z.at(N, p));
    std::copy(hat.k.at(N - 1, p), hat.k.at(N - 1, p) + m * J, hat.k.at(N, p));
  }
}

// Per-node linear slope of the backward value in the forward state, the
// discrete analog of the decoupling field's spatial derivative. Covariates
// mirror fill_design at degree one: intercept, forward state, remaining
// backward-noise increment, extras. The extras enter only to keep the
// forward-state slope from absorbing whatever co-moves with them; their own
// coefficients are discarded. Nodes where the forward state does not vary
// across paths (initial condition, fully damped channels) cannot identify a
// slope and borrow the nearest node that can.
std::vector<Mat> decoupling_slopes(const SystemDynamics& sys, const NoiseBundle& noise,
                                   const StatePaths& hat) {
  const Dimensions& dims = sys.dims();
  const int N = noise.steps;
  const int M = noise.paths;
  const int n = dims.n, m = dims.m, l = dims.l;
  const int e = sys.extra_vars();
  const int V = 1 + n + l + e;

  std::vector<Mat> slopes(static_cast<size_t>(N) + 1);
  std::vector<char> known(static_cast<size_t>(N) + 1, 0);
  std::vector<double> spread(static_cast<size_t>(N) + 1, 0.0);
  Mat X(V, V), XY(V, m);
  Vec row(V);
  std::vector<double> extra(static_cast<size_t>(std::max(e, 1)));

  for (int i = 0; i <= N; ++i) {
    X.setZero();
    XY.setZero();
    for (int p = 0; p < M; ++p) {
      row(0) = 1.0;
      const double* y = hat.y.at(i, p);
      for (int c = 0; c < n; ++c) row(1 + c) = y[c];
      const double* bt = noise.btail_at(i, p);
      for (int c = 0; c < l; ++c) row(1 + n + c) = bt[c];
      if (e > 0) {
        sys.extra(i, p, extra.data());
        for (int c = 0; c < e; ++c) row(1 + n + l + c) = extra[c];
      }
      X.noalias() += row * row.transpose();
      XY.noalias() += row * hat.Y.vec(i, p).transpose();
    }
    bool identifiable = true;
    double svar = 1e300;
    for (int c = 0; c < n; ++c) {
      const double ms = X(1 + c, 1 + c) / M;
      const double mean = X(0, 1 + c) / M;
      const double var = ms - mean * mean;
      svar = std::min(svar, var);
      if (var < 1e-8 * (1.0 + ms)) identifiable = false;
    }
    if (identifiable) {
      X.diagonal().array() += 1e-12 * (1.0 + X.trace() / V);
      const Mat beta = X.ldlt().solve(XY);  // V x m
      slopes[static_cast<size_t>(i)] = beta.middleRows(1, n).transpose();
      known[static_cast<size_t>(i)] = 1;
      spread[static_cast<size_t>(i)] = svar;
    }
  }

  // The slope noise scales inversely with the forward-state spread, and the
  // terminal node is exact (the sweep pins the terminal map into the data).
  // Blend weakly identified nodes toward their smoothed right neighbor,
  // weighting by spread, so thin nodes borrow strength instead of injecting
  // regression noise into the projection.
  double vmax = 0.0;
  for (int i = 0; i <= N; ++i) vmax = std::max(vmax, spread[static_cast<size_t>(i)]);
  if (vmax > 0.0) {
    const double floor_var = vmax / 25.0;
    for (int i = N - 1; i >= 0; --i) {
      if (!known[static_cast<size_t>(i)] || !known[static_cast<size_t>(i + 1)]) continue;
      const double w = spread[static_cast<size_t>(i)] / (spread[static_cast<size_t>(i)] + floor_var);
      slopes[static_cast<size_t>(i)] =
          w * slopes[static_cast<size_t>(i)] + (1.0 - w) * slopes[static_cast<size_t>(i + 1)];
    }
  }

  for (int i = 0; i <= N; ++i) {
    if (known[static_cast<size_t>(i)]) continue;
    int best = -1;
    for (int r = 1; r <= N && best < 0; ++r) {
      if (i - r >= 0 && known[static_cast<size_t>(i - r)]) best = i - r;
      if (best < 0 && i + r <= N && known[static_cast<size_t>(i + r)]) best = i + r;
    }
    if (best >= 0) {
      slopes[static_cast<size_t>(i)] = slopes[static_cast<size_t>(best)];
    } else {
      slopes[static_cast<size_t>(i)] = Mat::Zero(m, n);
    }
  }
  return slopes;
}

// Project the regression estimates of (z, Z, k) onto the martingale-matching
// system
//   U z = g,   Z = U sigma,   k_j = U phi_j,
// which is what identifies the integrands of a coupled pair: matching the
// backward-noise, Brownian and jump loadings of Y = U y + ... on both sides
// of the equations. The pure regression update cannot see z at all (the
// forward residual returns whatever z produced it), so without this stage
// the iteration has no fixed point once the coupling feeds z back into the
// coefficients. One Newton step from the regression values is exact for
// coefficients affine in the integrands; where the step is degenerate the
// least-squares solve leaves the regression values alone.
void consistency_project(const SystemDynamics& sys, const NoiseBundle& noise, const TimeGrid& grid,
                         const std::vector<Mat>& slopes, StatePaths& hat) {
  const Dimensions& dims = sys.dims();
  const int N = noise.steps;
  const int M = noise.paths;
  const int n = dims.n, m = dims.m, l = dims.l, d = dims.d;
  const int J = sys.jumps().count();
  const int D = n * l + m * d + m * J;
  const int R = m * l + m * d + m * J;
  const bool shared = sys.integrand_jacobians_shared();

  Vec xi(D), xip(D), r0(R), rplus(R), rminus(R);
  Vec gbuf(m * l), sbuf(n * d), pbuf(n * J);
  Mat jac(R, D);
  Eigen::CompleteOrthogonalDecomposition<Mat> fact;

  auto residual = [&](int i, int p, double t, const Vec& q, Vec& out) {
    const StateView s{hat.y.at(i, p), hat.Y.at(i, p), q.data(),
                      q.data() + n * l, q.data() + n * l + m * d,
                      n, m, l, d, J};
    sys.eval_g(i, p, t, s, gbuf);
    sys.eval_sigma(i, p, t, s, sbuf);
    sys.eval_phi(i, p, t, s, pbuf);
    const Mat& Ui = slopes[static_cast<size_t>(i)];
    Eigen::Map<Mat> top(out.data(), m, l);
    top.noalias() = Ui * s.z();
    top -= Eigen::Map<const Mat>(gbuf.data(), m, l);
    Eigen::Map<Mat> mid(out.data() + m * l, m, d);
    mid = s.Z();
    mid.noalias() -= Ui * Eigen::Map<const Mat>(sbuf.data(), n, d);
    Eigen::Map<Mat> bot(out.data() + m * l + m * d, m, J);
    bot = s.k();
    bot.noalias() -= Ui * Eigen::Map<const Mat>(pbuf.data(), n, J);
  };

  for (int i = 0; i <= N; ++i) {
    const double t = grid.t(i);
    bool have_fact = false;
    for (int p = 0; p < M; ++p) {
      std::copy(hat.z.at(i, p), hat.z.at(i, p) + n * l, xi.data());
      std::copy(hat.Z.at(i, p), hat.Z.at(i, p) + m * d, xi.data() + n * l);
      std::copy(hat.k.at(i, p), hat.k.at(i, p) + m * J, xi.data() + n * l + m * d);
      if (!have_fact) {
        for (int c = 0; c < D; ++c) {
          const double h = 1e-4 * (1.0 + std::abs(xi(c)));
          xip = xi;
          xip(c) += h;
          residual(i, p, t, xip, rplus);
          xip(c) -= 2.0 * h;
          residual(i, p, t, xip, rminus);
          jac.col(c) = (rplus - rminus) / (2.0 * h);
        }
        fact.compute(jac);
        have_fact = shared;
      }
      residual(i, p, t, xi, r0);
      xi -= fact.solve(r0);
      if (xi.allFinite()) {
        std::copy(xi.data(), xi.data() + n * l, hat.z.at(i, p));
        std::copy(xi.data() + n * l, xi.data() + n * l + m * d, hat.Z.at(i, p));
        std::copy(xi.data() + n * l + m * d, xi.data() + D, hat.k.at(i, p));
      }
    }
  }
}

void blend(PathArray& cur, const PathArray& hat, double theta) {
  Eigen::Map<Vec> a(cur.data().data(), static_cast<Eigen::Index>(cur.data().size()));
  Eigen::Map<const Vec> b(hat.data().data(), static_cast<Eigen::Index>(hat.data().size()));
  a = (1.0 - theta) * a + theta * b;
}

SolveReport picard_loop(const SystemDynamics& sys, const NoiseBundle& noise,
                        const SolveOptions& opt, StatePaths& state, bool resimulate, bool fit_z) {
  check_compat(sys, noise);
  check_options(opt);
  const Dimensions& dims = sys.dims();
  const int J = sys.jumps().count();
  const TimeGrid grid{noise.T, noise.steps};
  const int N = noise.steps;
  const int M = noise.paths;

  RegressionBasis basis{opt.basis_degree};
  StatePaths hat = StatePaths::zeros(dims, J, grid, M);
  PathArray inc;
  if (fit_z) inc = PathArray(N, M, dims.n);
  if (!resimulate) hat.y.data() = state.y.data();
  if (!fit_z) hat.z.data() = state.z.data();

  SolveReport rep;
  SweepDiag diag;
  Vec shift(dims.m), want(dims.m);
  std::vector<Mat> slopes;
  bool slopes_frozen = false;
  int slope_updates = 0;
  double theta = opt.theta;
  int last_halve = 0;

  for (int q = 1; q <= opt.max_iter; ++q) {
    if (resimulate) forward_pass(sys, noise, grid, state, hat.y, fit_z ? &inc : nullptr);
    backward_sweep(sys, noise, grid, basis, state, fit_z ? &inc : nullptr, fit_z, hat, diag);
    if (fit_z) {
      // Slopes are damped like the iterate itself, then frozen once the
      // iterate has settled. Re-estimating them forever lets the regression
      // model error circulate through the projection instead of letting the
      // damped tail contract; freezing on a single early estimate (short warm
      // transients) locks in its noise, hence the minimum update count.
      if (!slopes_frozen) {
        std::vector<Mat> fresh = decoupling_slopes(sys, noise, hat);
        if (slopes.empty()) {
          slopes = std::move(fresh);
        } else {
          for (std::size_t s = 0; s < slopes.size(); ++s) {
            slopes[s] = (1.0 - theta) * slopes[s] + theta * fresh[s];
          }
        }
        ++slope_updates;
      }
      consistency_project(sys, noise, grid, slopes, hat);
    }

    const DiscreteNorm dist = m2_distance(hat, state, sys.jumps());
    const double change = theta * dist.value;
    if (fit_z && !slopes_frozen && slope_updates >= 5 && change <= 50.0 * opt.tol)
      slopes_frozen = true;

    blend(state.y, hat.y, theta);
    blend(state.Y, hat.Y, theta);
    blend(state.z, hat.z, theta);
    blend(state.Z, hat.Z, theta);
    blend(state.k, hat.k, theta);

    // Both boundary conditions are data, not estimates; re-pin them after
    // the blend so they hold exactly in the returned state.
    if (resimulate) {
      for (int p = 0; p < M; ++p) {
        auto y0 = state.y.vec(0, p);
        sys.initial_state(p, y0);
      }
    }

    double tres = 0.0;
    for (int p = 0; p < M; ++p) {
      sys.terminal_shift(p, shift);
      want = sys.terminal_c() * (sys.terminal_R() * state.y.vec(N, p)) + shift;
      tres = std::max(tres, (state.Y.vec(N, p) - want).cwiseAbs().maxCoeff());
      state.Y.vec(N, p) = want;
    }
    rep.terminal_residual = tres;
    rep.changes.push_back(change);
    rep.iterations = q;
    if (change <= opt.tol) {
      rep.converged = true;
      break;
    }

    // The regression designs move with the iterate, which can leave a small
    // limit cycle just above tol. When the movement plateaus without growing,
    // halve the damping: the fixed point is unchanged and the iterate
    // genuinely settles. Growing changes (true divergence) never match the
    // plateau test.
    const std::size_t window = 5;
    if (q >= 10 && q - last_halve >= 3 && rep.changes.size() >= window && theta > opt.theta / 8.0) {
      double lo = change, hi = change;
      for (std::size_t b = 2; b <= window; ++b) {
        const double c = rep.changes[rep.changes.size() - b];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      if (hi <= 2.0 * lo) {
        theta *= 0.5;
        last_halve = q;
      }
    }
  }

  rep.max_condition = diag.max_condition;
  rep.min_rank = std::max(diag.min_rank, 0);
  rep.worst_node = diag.worst_node;
  return rep;
}

class ControlledDynamics final : public SystemDynamics {
 public:
  ControlledDynamics(const ProblemSpec& spec, const ControlProcess& control)
      : spec_(spec), control_(control) {
    if (control.dim() != spec.dims.r) {
      throw std::invalid_argument("solver: control dimension does not match the problem");
    }
  }

  const Dimensions& dims() const override { return spec_.dims; }
  const JumpMeasure& jumps() const override { return spec_.jumps; }
  double terminal_c() const override { return spec_.terminal.c; }
  const Mat& terminal_R() const override { return spec_.terminal.R; }
  void terminal_shift(int, VecRef out) const override { out = spec_.terminal.xi; }
  void initial_state(int, VecRef out) const override { out = spec_.x0; }

  void eval_b(int i, int, double t, const StateView& s, VecRef out) const override {
    spec_.coeffs.b(t, s, v_at(i, s), out);
  }
  void eval_sigma(int i, int, double t, const StateView& s, VecRef out) const override {
    spec_.coeffs.sigma(t, s, v_at(i, s), out);
  }
  void eval_phi(int i, int, double t, const StateView& s, VecRef out) const override {
    spec_.coeffs.phi(t, s, v_at(i, s), out);
  }
  void eval_f(int i, int, double t, const StateView& s, VecRef out) const override {
    spec_.coeffs.f(t, s, v_at(i, s), out);
  }
  void eval_g(int i, int, double t, const StateView& s, VecRef out) const override {
    spec_.coeffs.g(t, s, v_at(i, s), out);
  }

  bool integrand_jacobians_shared() const override {
    return spec_.coeffs.jacobians_state_independent;
  }

 private:
  const Vec& v_at(int i, const StateView& s) const {
    thread_local Vec v;
    v.resize(spec_.dims.r);
    control_.eval(i, s.y(), spec_.controls, v);
    return v;
  }

  const ProblemSpec& spec_;
  const ControlProcess& control_;
};

void check_control_nodes(const ControlProcess& control, const NoiseBundle& noise) {
  if (control.nodes() < noise.steps + 1) {
    throw std::invalid_argument("solver: control has fewer nodes than the grid");
  }
}

}  // namespace

SolveReport solve_coupled(const SystemDynamics& sys, const NoiseBundle& noise,
                          const SolveOptions& opt, StatePaths& state) {
  const Dimensions& dims = sys.dims();
  const int J = sys.jumps().count();
  const TimeGrid grid{noise.T, noise.steps};
  const bool shape_ok = state.paths == noise.paths && state.grid.steps == noise.steps &&
                        state.dims.n == dims.n && state.dims.m == dims.m &&
                        state.dims.l == dims.l && state.dims.d == dims.d && state.jump_marks == J;
  if (!opt.warm_start || !shape_ok) state = StatePaths::zeros(dims, J, grid, noise.paths);
  return picard_loop(sys, noise, opt, state, true, true);
}

SolveReport solve_fbdsde(const ProblemSpec& spec, const ControlProcess& control,
                         const NoiseBundle& noise, const SolveOptions& opt, StatePaths& state) {
  ControlledDynamics sys(spec, control);
  check_control_nodes(control, noise);
  return solve_coupled(sys, noise, opt, state);
}

void simulate_forward(const ProblemSpec& spec, const ControlProcess& control,
                      const NoiseBundle& noise, StatePaths& state) {
  ControlledDynamics sys(spec, control);
  check_compat(sys, noise);
  check_control_nodes(control, noise);
  const TimeGrid grid{noise.T, noise.steps};
  if (state.paths != noise.paths || state.grid.steps != noise.steps) {
    throw std::invalid_argument("solver: state shape does not match the noise bundle");
  }
  forward_pass(sys, noise, grid, state, state.y, nullptr);
}

SolveReport solve_backward(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const SolveOptions& opt, StatePaths& state) {
  ControlledDynamics sys(spec, control);
  check_control_nodes(control, noise);
  if (state.paths != noise.paths || state.grid.steps != noise.steps) {
    throw std::invalid_argument("solver: state shape does not match the noise bundle");
  }
  return picard_loop(sys, noise, opt, state, false, false);
}

}  // namespace fbdsde
