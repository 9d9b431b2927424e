// Cost estimation and the projected Hamiltonian ascent on the benchmark
// problem with its known optimal control u = 0 and value 2 x0^2.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/catalog.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/optimizer.hpp"
#include "core/solver.hpp"

using namespace fbdsde;

namespace {

NoiseBundle noise_for(const ProblemSpec& spec, int steps, int paths, std::uint64_t seed) {
  const TimeGrid grid{spec.T, steps};
  return sample_noise_bundle(grid, paths, seed, spec.dims.d, spec.dims.l, spec.jumps);
}

bool trace_non_increasing(const std::vector<double>& trace, double slack) {
  for (size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + slack) return false;
  return true;
}

}  // namespace

TEST_CASE("cost estimate at the optimal control matches the closed-form value") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 25, 2000, 19);
  const ControlProcess u = ControlProcess::constant(Vec::Zero(1), 26);

  const CostEstimate est = estimate_cost(spec, u, noise, SolveOptions{});
  CHECK(est.converged);
  // At u = 0 every noise loading vanishes, the paths are deterministic and
  // the standard error collapses with them.
  CHECK(est.se >= 0.0);
  CHECK(std::abs(est.value - 2.0) < 0.1);
  // beta and gamma each contribute x^2/2, the running term the remaining 1.
  CHECK(est.terminal == doctest::Approx(0.5).epsilon(0.1));
  CHECK(est.initial == doctest::Approx(0.5).epsilon(0.1));
  CHECK(est.running == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("constant controls away from the optimum cost strictly more") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 20, 1000, 29);

  const CostEstimate at0 =
      estimate_cost(spec, ControlProcess::constant(Vec::Zero(1), 21), noise, SolveOptions{});
  const CostEstimate at5 =
      estimate_cost(spec, ControlProcess::constant(Vec::Constant(1, 0.5), 21), noise,
                    SolveOptions{});
  CHECK(at5.value > at0.value + 0.05);  // common noise makes this a sharp comparison
}

TEST_CASE("ascent drives the benchmark control to the known optimum") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 20, 800, 23);

  ControlProcess u = ControlProcess::constant(Vec::Constant(1, 0.5), 21);
  OptimizeOptions opt;
  const OptimizeReport rep = optimize_control(spec, noise, opt, u);

  CHECK(rep.converged);
  CHECK((rep.stop_reason == "gradient" || rep.stop_reason == "step"));
  CHECK(rep.iterations <= opt.max_iter);
  CHECK(u.values().cwiseAbs().maxCoeff() < 0.05);
  CHECK(rep.final_cost < rep.cost_trace.front());
  CHECK(std::abs(rep.final_cost - 2.0) < 0.15);
  CHECK(trace_non_increasing(rep.cost_trace, 1e-9));
  CHECK(rep.grad_trace.size() == static_cast<size_t>(rep.iterations));
}

TEST_CASE("starting at the optimum terminates quickly without drifting away") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 15, 500, 31);

  ControlProcess u = ControlProcess::constant(Vec::Zero(1), 16);
  OptimizeOptions opt;
  opt.max_iter = 60;
  const OptimizeReport rep = optimize_control(spec, noise, opt, u);

  CHECK(rep.converged);
  CHECK(u.values().cwiseAbs().maxCoeff() < 0.05);
  CHECK(trace_non_increasing(rep.cost_trace, 1e-9));
}

TEST_CASE("feedback controls flow toward the zero policy as well") {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const NoiseBundle noise = noise_for(spec, 10, 300, 37);

  // Constant-0.5 policy expressed through degree-1 feedback coefficients.
  Mat coeff(2, 1);
  coeff << 0.5, 0.0;
  ControlProcess u = ControlProcess::feedback(std::vector<Mat>(11, coeff), 1);
  OptimizeOptions opt;
  opt.max_iter = 60;
  const OptimizeReport rep = optimize_control(spec, noise, opt, u);

  CHECK(rep.converged);
  CHECK(trace_non_increasing(rep.cost_trace, 1e-9));
  Vec out(1);
  double usup = 0.0;
  for (int i = 0; i <= 10; ++i) {
    u.eval(i, Vec::Constant(1, 1.0), spec.controls, out);
    usup = std::max(usup, std::abs(out[0]));
  }
  CHECK(usup < 0.2);
}
