#include "core/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/adjoint.hpp"
#include "core/hamiltonian.hpp"

namespace fbdsde {

CostEstimate cost_of_state(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const StatePaths& state) {
  const Dimensions& dims = spec.dims;
  const int N = noise.steps;
  const int M = noise.paths;
  if (state.paths != M || state.grid.steps != N)
    throw std::invalid_argument("cost_of_state: state shape does not match the noise");
  TimeGrid grid{spec.T, N};
  const double dt = grid.dt();

  CostEstimate est;
  double sum = 0.0, sumsq = 0.0;
  Vec uval(dims.r);
  for (int p = 0; p < M; ++p) {
    double run = 0.0;
    // Trapezoid weights so the endpoint controls stay visible to the cost:
    // with a left rule the node-N control would be free to drift.
    for (int i = 0; i <= N; ++i) {
      StateView s = state.view(i, p);
      control.eval(i, s.y(), spec.controls, uval);
      const double w = (i == 0 || i == N) ? 0.5 : 1.0;
      run += w * dt * spec.cost.running(grid.t(i), s, uval);
    }
    Eigen::Map<const Vec> yN(state.y.at(N, p), dims.n);
    Eigen::Map<const Vec> Y0(state.Y.at(0, p), dims.m);
    double term = spec.cost.terminal(yN);
    double init = spec.cost.initial(Y0);
    double total = run + term + init;
    est.running += run;
    est.terminal += term;
    est.initial += init;
    sum += total;
    sumsq += total * total;
  }
  est.running /= M;
  est.terminal /= M;
  est.initial /= M;
  est.value = sum / M;
  if (M > 1) {
    double var = (sumsq - sum * sum / M) / (M - 1);
    est.se = std::sqrt(std::max(0.0, var) / M);
  }
  return est;
}

CostEstimate estimate_cost(const ProblemSpec& spec, const ControlProcess& control,
                           const NoiseBundle& noise, const SolveOptions& opt) {
  StatePaths state;
  SolveReport rep = solve_fbdsde(spec, control, noise, opt, state);
  CostEstimate est = cost_of_state(spec, control, noise, state);
  est.converged = rep.converged;
  return est;
}

namespace {

// Ascent direction per node: the path mean of H_v for open-loop controls,
// the path mean of features(y) * H_v' per coefficient for feedback ones.
struct Gradient {
  Mat open_loop;            // r x nodes
  std::vector<Mat> coeffs;  // per node, features x r
};

void eval_gradient(const ProblemSpec& spec, const NoiseBundle& noise, const StatePaths& state,
                   const AdjointPaths& adj, const ControlProcess& control, Gradient& out) {
  const Dimensions& dims = spec.dims;
  const int N = noise.steps;
  const int M = noise.paths;
  const int J = spec.marks();
  TimeGrid grid{spec.T, N};
  const bool open = control.kind() == ControlProcess::Kind::OpenLoop;

  if (open) {
    out.open_loop = Mat::Zero(dims.r, N + 1);
  } else {
    out.coeffs.assign(N + 1, Mat::Zero(polynomial_feature_count(dims.n, control.feature_degree()),
                                       dims.r));
  }
  HamiltonianGradients grads;
  grads.resize(dims, J);
  Vec uval(dims.r);
  std::vector<double> feats;
  for (int i = 0; i <= N; ++i) {
    double t = grid.t(i);
    for (int p = 0; p < M; ++p) {
      StateView s = state.view(i, p);
      control.eval(i, s.y(), spec.controls, uval);
      eval_hamiltonian_gradients(spec, t, s, adj.view(i, p), uval, grads);
      if (open) {
        out.open_loop.col(i) += grads.v;
      } else {
        polynomial_features(s.y(), control.feature_degree(), feats);
        Mat& gi = out.coeffs[i];
        for (int fidx = 0; fidx < gi.rows(); ++fidx)
          gi.row(fidx) += feats[fidx] * grads.v.transpose();
      }
    }
    if (open) {
      out.open_loop.col(i) /= M;
    } else {
      out.coeffs[i] /= M;
    }
  }
}

ControlProcess step_control(const ProblemSpec& spec, const ControlProcess& control,
                            const Gradient& grad, double alpha) {
  if (control.kind() == ControlProcess::Kind::OpenLoop) {
    Mat vals = control.values();
    for (int i = 0; i < vals.cols(); ++i)
      vals.col(i) = spec.controls.project(vals.col(i) + alpha * grad.open_loop.col(i));
    return ControlProcess::open_loop(std::move(vals));
  }
  std::vector<Mat> coeffs = control.coefficients();
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += alpha * grad.coeffs[i];
  return ControlProcess::feedback(std::move(coeffs), control.feature_degree());
}

double gradient_norm(const ProblemSpec& spec, const ControlProcess& control,
                     const Gradient& grad) {
  double worst = 0.0;
  if (control.kind() == ControlProcess::Kind::OpenLoop) {
    const Mat& vals = control.values();
    for (int i = 0; i < vals.cols(); ++i) {
      Vec moved = spec.controls.project(vals.col(i) + grad.open_loop.col(i));
      worst = std::max(worst, (moved - vals.col(i)).cwiseAbs().maxCoeff());
    }
  } else {
    for (const Mat& gi : grad.coeffs)
      worst = std::max(worst, gi.size() > 0 ? gi.cwiseAbs().maxCoeff() : 0.0);
  }
  return worst;
}

}  // namespace

OptimizeReport optimize_control(const ProblemSpec& spec, const NoiseBundle& noise,
                                const OptimizeOptions& opt, ControlProcess& control) {
  spec.validate();
  if (opt.max_iter < 1) throw std::invalid_argument("optimize_control: max_iter must be positive");
  if (!(opt.step0 > 0) || !(opt.step_cap >= opt.step0) || !(opt.min_step > 0))
    throw std::invalid_argument("optimize_control: bad step sizes");

  SolveOptions cold = opt.solve;
  cold.warm_start = false;
  SolveOptions warm = opt.solve;
  warm.warm_start = true;

  OptimizeReport rep;
  StatePaths state;
  SolveReport sr = solve_fbdsde(spec, control, noise, cold, state);
  CostEstimate best = cost_of_state(spec, control, noise, state);
  rep.cost_trace.push_back(best.value);
  if (!sr.converged) {
    rep.stop_reason = "solver";
    rep.final_cost = best.value;
    rep.final_cost_se = best.se;
    return rep;
  }

  AdjointPaths adj;
  Gradient grad;
  double step = opt.step0;
  int first_try_streak = 0;
  bool adj_warm = false;

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    SolveOptions aopt = adj_warm ? warm : cold;
    SolveReport ar = solve_adjoint(spec, control, noise, state, aopt, adj);
    adj_warm = true;
    if (!ar.converged && aopt.warm_start) {
      // A warm start left over from a control several steps back can sit in
      // the wrong basin; a cold retry decides whether the solve is at fault.
      ar = solve_adjoint(spec, control, noise, state, cold, adj);
    }
    if (!ar.converged) {
      rep.stop_reason = "solver";
      break;
    }
    eval_gradient(spec, noise, state, adj, control, grad);
    double gnorm = gradient_norm(spec, control, grad);
    rep.grad_trace.push_back(gnorm);
    rep.final_grad_norm = gnorm;
    rep.iterations = iter;
    if (gnorm <= opt.grad_tol) {
      rep.stop_reason = "gradient";
      rep.converged = true;
      break;
    }

    bool accepted = false;
    for (double alpha = step; alpha >= opt.min_step; alpha *= 0.5) {
      ControlProcess trial = step_control(spec, control, grad, alpha);
      StatePaths tstate = state;
      SolveReport tr = solve_fbdsde(spec, trial, noise, warm, tstate);
      CostEstimate tcost = cost_of_state(spec, trial, noise, tstate);
      if (tr.converged && tcost.value <= best.value + 1e-12) {
        control = std::move(trial);
        state = std::move(tstate);
        best = tcost;
        rep.cost_trace.push_back(best.value);
        if (alpha == step) {
          if (++first_try_streak >= 3) {
            step = std::min(2.0 * step, opt.step_cap);
            first_try_streak = 0;
          }
        } else {
          step = alpha;
          first_try_streak = 0;
        }
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No admissible step improves the shared-noise estimate: the iterate
      // sits at the Monte Carlo floor.
      rep.stop_reason = "step";
      rep.converged = true;
      break;
    }
  }
  if (rep.stop_reason.empty()) rep.stop_reason = "max-iter";
  rep.final_cost = best.value;
  rep.final_cost_se = best.se;
  return rep;
}

}  // namespace fbdsde
