// Coupled solver engine: exact fixed points, the forward Euler step, the
// regression building block, warm starts and failure reporting.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/catalog.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/norms.hpp"
#include "core/regression.hpp"
#include "core/solver.hpp"

using namespace fbdsde;

namespace {

NoiseBundle noise_for(const ProblemSpec& spec, int steps, int paths, std::uint64_t seed) {
  const TimeGrid grid{spec.T, steps};
  return sample_noise_bundle(grid, paths, seed, spec.dims.d, spec.dims.l, spec.jumps);
}

ControlProcess constant_control(double v, int steps) {
  return ControlProcess::constant(Vec::Constant(1, v), steps + 1);
}

}  // namespace

TEST_CASE("decoupled constant problem is solved to machine precision") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("decoupled-constant"));
  const NoiseBundle noise = noise_for(spec, 8, 64, 21);
  const ControlProcess u = constant_control(0.0, 8);

  SolveOptions opt;
  opt.theta = 1.0;
  opt.tol = 1e-10;
  StatePaths state;
  const SolveReport rep = solve_fbdsde(spec, u, noise, opt, state);

  CHECK(rep.converged);
  CHECK(rep.iterations <= 3);
  CHECK(rep.terminal_residual < 1e-9);
  CHECK(rep.min_rank >= 1);
  CHECK(rep.max_condition >= 1.0);

  // Exact solution: y = 0, Y = 1 (the terminal shift), all integrands zero.
  for (int i = 0; i <= 8; ++i) {
    for (int p = 0; p < 64; ++p) {
      CHECK(std::abs(state.y.at(i, p)[0]) < 1e-9);
      CHECK(std::abs(state.Y.at(i, p)[0] - 1.0) < 1e-9);
      CHECK(std::abs(state.z.at(i, p)[0]) < 1e-9);
      CHECK(std::abs(state.Z.at(i, p)[0]) < 1e-9);
      for (int j = 0; j < spec.marks(); ++j) CHECK(std::abs(state.k.at(i, p)[j]) < 1e-9);
    }
  }
}

TEST_CASE("forward simulation reproduces the explicit Euler recursion") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const int N = 4, M = 3;
  const NoiseBundle noise = noise_for(spec, N, M, 77);
  const ControlProcess u = constant_control(0.25, N);
  const double dt = noise.dt();

  StatePaths state = StatePaths::zeros(spec.dims, spec.marks(), TimeGrid{spec.T, N}, M);
  // Nonzero z exercises the backward-noise term with its right-node index.
  for (int i = 0; i <= N; ++i)
    for (int p = 0; p < M; ++p) state.z.at(i, p)[0] = 0.3;

  simulate_forward(spec, u, noise, state);

  for (int p = 0; p < M; ++p) {
    double y = spec.x0[0];
    CHECK(state.y.at(0, p)[0] == doctest::Approx(y).epsilon(1e-14));
    for (int i = 0; i < N; ++i) {
      const double t = noise.T * i / N;
      const double b = (1.0 + t) * 0.25;
      const double sigma = -0.3 + 0.25;  // -z + Z + int k nu + v at this state
      double jump = 0.0;
      for (int j = 0; j < spec.marks(); ++j)
        jump += -0.25 * spec.jumps.marks[j] * noise.dN_at(i, p)[j];
      y += b * dt + sigma * noise.dW_at(i, p)[0] + jump - 0.3 * noise.dB_at(i, p)[0];
      CHECK(state.y.at(i + 1, p)[0] == doctest::Approx(y).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward-only solve holds the forward components fixed") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("decoupled-constant"));
  const int N = 6, M = 32;
  const NoiseBundle noise = noise_for(spec, N, M, 31);
  const ControlProcess u = constant_control(0.0, N);

  StatePaths state = StatePaths::zeros(spec.dims, spec.marks(), TimeGrid{spec.T, N}, M);
  for (int i = 0; i <= N; ++i)
    for (int p = 0; p < M; ++p) state.y.at(i, p)[0] = 0.5;

  SolveOptions opt;
  opt.theta = 1.0;
  opt.tol = 1e-10;
  const SolveReport rep = solve_backward(spec, u, noise, opt, state);

  CHECK(rep.converged);
  for (int i = 0; i <= N; ++i) {
    for (int p = 0; p < M; ++p) {
      CHECK(state.y.at(i, p)[0] == doctest::Approx(0.5));  // untouched
      // Y = c R y_T + xi = 1.5 propagates backward unchanged.
      CHECK(std::abs(state.Y.at(i, p)[0] - 1.5) < 1e-9);
      CHECK(std::abs(state.Z.at(i, p)[0]) < 1e-9);
    }
  }
}

TEST_CASE("coupled benchmark solve lands near the closed-form quintuple") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 20, 800, 5);
  const ControlProcess u = constant_control(0.0, 20);

  StatePaths state;
  const SolveReport rep = solve_fbdsde(spec, u, noise, SolveOptions{}, state);

  CHECK(rep.converged);
  CHECK(rep.iterations < 50);

  // Exact solution at u = 0: y = Y = x0 = 1, integrands vanish.
  double ysup = 0.0, Ysup = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int p = 0; p < 800; ++p) {
      ysup = std::max(ysup, std::abs(state.y.at(i, p)[0] - 1.0));
      Ysup = std::max(Ysup, std::abs(state.Y.at(i, p)[0] - 1.0));
    }
  }
  CHECK(ysup < 0.12);
  CHECK(Ysup < 0.12);

  const DiscreteNorm norm = m2_norm(state, spec.jumps);
  CHECK(norm.z < 0.1);
  CHECK(norm.Z < 0.1);
  CHECK(norm.k < 0.1);
}

TEST_CASE("warm starts converge faster than cold ones") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 15, 400, 9);
  const ControlProcess u = constant_control(0.0, 15);

  StatePaths state;
  SolveOptions opt;
  const SolveReport cold = solve_fbdsde(spec, u, noise, opt, state);
  REQUIRE(cold.converged);

  opt.warm_start = true;
  const SolveReport warm = solve_fbdsde(spec, u, noise, opt, state);
  CHECK(warm.converged);
  CHECK(warm.iterations <= cold.iterations);
  CHECK(warm.iterations <= 3);
}

TEST_CASE("node regression recovers polynomials in span and flags bad input") {
  RegressionBasis basis{2};
  const int F = basis.features(1);
  REQUIRE(F == 3);

  const int M = 50;
  Mat design(M, F);
  Mat target(M, 1);
  double row[3];
  for (int i = 0; i < M; ++i) {
    const double x = -1.0 + 2.0 * i / (M - 1);
    basis.fill_row(&x, 1, row);
    for (int c = 0; c < 3; ++c) design(i, c) = row[c];
    target(i, 0) = 2.0 + 3.0 * x - x * x;
  }

  NodeRegression reg;
  reg.factorize(design, 7);
  CHECK(reg.ready());
  CHECK(reg.node() == 7);
  CHECK(reg.rank() == 3);
  CHECK(reg.condition() >= 1.0);

  Mat fitted(M, 1);
  reg.fit(target, fitted);
  CHECK((fitted - target).cwiseAbs().maxCoeff() < 1e-10);

  Mat bad = design;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  NodeRegression reg2;
  CHECK_THROWS_AS(reg2.factorize(bad, 1), std::runtime_error);
}

TEST_CASE("solver reports failure modes instead of hiding them") {
  ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 10, 200, 13);
  const ControlProcess u = constant_control(0.0, 10);

  SolveOptions strict;
  strict.tol = 1e-14;
  strict.max_iter = 1;
  StatePaths state;
  const SolveReport rep = solve_fbdsde(spec, u, noise, strict, state);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.changes.size() == 1);

  // A non-finite initial state must surface as an error, not as garbage.
  spec.x0[0] = std::numeric_limits<double>::quiet_NaN();
  StatePaths fresh;
  CHECK_THROWS_AS(solve_fbdsde(spec, u, noise, SolveOptions{}, fresh), std::runtime_error);

  // Control shorter than the grid is rejected up front.
  const ControlProcess tiny = constant_control(0.0, 4);
  ProblemSpec ok = build_lq_problem(catalog_problem("example31"));
  StatePaths other;
  CHECK_THROWS_AS(solve_fbdsde(ok, tiny, noise, SolveOptions{}, other), std::invalid_argument);
}
