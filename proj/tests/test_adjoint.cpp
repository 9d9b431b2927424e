// Hamiltonian evaluation, its analytic gradients and the adjoint pair
// solver, checked against the benchmark's closed-form dual trajectories.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/adjoint.hpp"
#include "core/catalog.hpp"
#include "core/hamiltonian.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/norms.hpp"
#include "core/rng.hpp"
#include "core/solver.hpp"

using namespace fbdsde;

namespace {

NoiseBundle noise_for(const ProblemSpec& spec, int steps, int paths, std::uint64_t seed) {
  const TimeGrid grid{spec.T, steps};
  return sample_noise_bundle(grid, paths, seed, spec.dims.d, spec.dims.l, spec.jumps);
}

// Benchmark dual pair along the optimal trajectory started at x.
double exact_p(double x, double t) { return -x * (1.0 + t); }
double exact_P(double x, double t) { return x * (4.0 - t); }

StateValue optimal_state(const ProblemSpec& spec, double x) {
  StateValue s = StateValue::zero(spec.dims, spec.marks());
  s.y.setConstant(x);
  s.Y.setConstant(x);
  return s;
}

AdjointValue dual_at(const ProblemSpec& spec, double x, double t) {
  AdjointValue a = AdjointValue::zero(spec.dims, spec.marks());
  a.p.setConstant(exact_p(x, t));
  a.P.setConstant(exact_P(x, t));
  return a;
}

void random_fill(Rng& rng, double scale, Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.gaussian();
}
void random_fill(Rng& rng, double scale, Mat& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.gaussian();
}

// Max relative error between the analytic Hamiltonian gradient and a
// central-difference probe at one random point.
double gradient_fd_error(const ProblemSpec& spec, Rng& rng) {
  const int J = spec.marks();
  StateValue s = StateValue::zero(spec.dims, J);
  random_fill(rng, 0.7, s.y);
  random_fill(rng, 0.7, s.Y);
  random_fill(rng, 0.7, s.z);
  random_fill(rng, 0.7, s.Z);
  random_fill(rng, 0.7, s.k);
  AdjointValue a = AdjointValue::zero(spec.dims, J);
  random_fill(rng, 0.7, a.p);
  random_fill(rng, 0.7, a.P);
  random_fill(rng, 0.7, a.q);
  random_fill(rng, 0.7, a.Q);
  random_fill(rng, 0.7, a.V);
  Vec v(spec.dims.r);
  random_fill(rng, 0.4, v);
  v = spec.controls.project(v);
  const double t = rng.uniform01() * spec.T;

  HamiltonianGradients grad;
  grad.resize(spec.dims, J);
  eval_hamiltonian_gradients(spec, t, s.view(), view_of(a, spec.dims, J), v, grad);

  const double h = 1e-5;
  const AdjointView av = view_of(a, spec.dims, J);
  double worst = 0.0;
  auto update = [&](double analytic, double* slot) {
    const double keep = *slot;
    *slot = keep + h;
    const double up = eval_hamiltonian(spec, t, s.view(), av, v);
    *slot = keep - h;
    const double dn = eval_hamiltonian(spec, t, s.view(), av, v);
    *slot = keep;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
  };

  for (int i = 0; i < spec.dims.n; ++i) update(grad.y[i], &s.y[i]);
  for (int i = 0; i < spec.dims.m; ++i) update(grad.Y[i], &s.Y[i]);
  for (int i = 0; i < spec.dims.n * spec.dims.l; ++i) update(grad.z[i], s.z.data() + i);
  for (int i = 0; i < spec.dims.m * spec.dims.d; ++i) update(grad.Z[i], s.Z.data() + i);
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i < spec.dims.m; ++i) {
      // The stored k gradient is a density; the raw derivative carries w_j.
      const double raw = grad.k[j * spec.dims.m + i] * spec.jumps.weights[j];
      update(raw, s.k.data() + j * spec.dims.m + i);
    }
  }
  for (int i = 0; i < spec.dims.r; ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = eval_hamiltonian(spec, t, s.view(), av, v);
    v[i] = keep - h;
    const double dn = eval_hamiltonian(spec, t, s.view(), av, v);
    v[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(grad.v[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace

TEST_CASE("hamiltonian matches its closed form along the benchmark optimum") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const double x = 1.0;
  const StateValue s = optimal_state(spec, x);

  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    const AdjointValue a = dual_at(spec, x, t);
    const AdjointView av = view_of(a, spec.dims, spec.marks());
    for (double v : {0.0, 0.5, -1.0, 1.0}) {
      const double got = eval_hamiltonian(spec, t, s.view(), av, Vec::Constant(1, v));
      CHECK(got == doctest::Approx(-x * x - 0.5 * v * v).epsilon(1e-12));
    }
    // v = 0 maximizes H pointwise, with a strict quadratic drop-off.
    const double at0 = eval_hamiltonian(spec, t, s.view(), av, Vec::Constant(1, 0.0));
    const double at05 = eval_hamiltonian(spec, t, s.view(), av, Vec::Constant(1, 0.5));
    CHECK(at0 - at05 == doctest::Approx(0.125));
  }
}

TEST_CASE("hamiltonian gradients vanish in the right blocks at the optimum") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const double x = 1.0;
  const StateValue s = optimal_state(spec, x);

  for (double t : {0.0, 0.4, 1.0}) {
    const AdjointValue a = dual_at(spec, x, t);
    HamiltonianGradients grad;
    grad.resize(spec.dims, spec.marks());
    eval_hamiltonian_gradients(spec, t, s.view(), view_of(a, spec.dims, spec.marks()),
                               Vec::Constant(1, 0.0), grad);
    CHECK(grad.v[0] == doctest::Approx(0.0).epsilon(1e-12));  // critical control
    CHECK(grad.Y[0] == doctest::Approx(-x));
    CHECK(grad.y[0] == doctest::Approx(-x));
    CHECK(grad.Z[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grad.z[0] == doctest::Approx(0.0).epsilon(1e-12));
    for (int j = 0; j < spec.marks(); ++j)
      CHECK(grad.k[j] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("hamiltonian gradients agree with central differences") {
  for (const char* name : {"example31", "monotone-dissipative"}) {
    CAPTURE(name);
    const ProblemSpec spec = build_lq_problem(catalog_problem(name));
    Rng rng(2718, 5);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) worst = std::max(worst, gradient_fd_error(spec, rng));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("adjoint pair reproduces the closed-form dual trajectories") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const int N = 25, M = 1200;
  const NoiseBundle noise = noise_for(spec, N, M, 11);
  const ControlProcess u = ControlProcess::constant(Vec::Zero(1), N + 1);
  const double x = spec.x0[0];

  StatePaths state;
  const SolveReport primal = solve_fbdsde(spec, u, noise, SolveOptions{}, state);
  REQUIRE(primal.converged);

  AdjointPaths adj;
  const SolveReport dual = solve_adjoint(spec, u, noise, state, SolveOptions{}, adj);
  CHECK(dual.converged);

  // Hard boundary conditions hold pathwise.
  for (int p = 0; p < M; ++p) {
    CHECK(std::abs(adj.p.at(0, p)[0] + state.Y.at(0, p)[0]) < 1e-12);
    const double want = -adj.p.at(N, p)[0] + state.y.at(N, p)[0];
    CHECK(std::abs(adj.P.at(N, p)[0] - want) < 1e-12);
  }

  double p_sup = 0.0, P_sup = 0.0, worst_std = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double t = spec.T * i / N;
    double mean = 0.0, sq = 0.0;
    for (int p = 0; p < M; ++p) {
      const double pv = adj.p.at(i, p)[0];
      p_sup = std::max(p_sup, std::abs(pv - exact_p(x, t)));
      P_sup = std::max(P_sup, std::abs(adj.P.at(i, p)[0] - exact_P(x, t)));
      mean += pv;
      sq += pv * pv;
    }
    mean /= M;
    worst_std = std::max(worst_std, std::sqrt(std::max(0.0, sq / M - mean * mean)));
  }
  CHECK(p_sup < 0.1);
  CHECK(P_sup < 0.1);
  CHECK(worst_std < 0.05);  // the exact dual is deterministic

  const double dt = spec.T / N;
  CHECK(process_m2(adj.q, dt, 1, 1, nullptr) < 0.1);
  CHECK(process_m2(adj.Q, dt, 1, 1, nullptr) < 0.1);
  CHECK(process_m2(adj.V, dt, 1, spec.marks(), spec.jumps.weights.data()) < 0.1);
}
