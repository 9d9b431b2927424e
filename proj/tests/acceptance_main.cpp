// Acceptance gate: one pass/fail line per criterion, exit 1 on any failure.
// Criteria 1-4 share the canonical benchmark run (N=50, M=4000, seed 7); the
// rest size their own runs. Everything is deterministic in the fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/adjoint.hpp"
#include "core/audit.hpp"
#include "core/catalog.hpp"
#include "core/hamiltonian.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/norms.hpp"
#include "core/optimizer.hpp"
#include "core/pipeline.hpp"
#include "core/product_rule.hpp"
#include "core/rng.hpp"
#include "core/solver.hpp"

using namespace fbdsde;
namespace fs = std::filesystem;

namespace {

bool g_all_ok = true;

void report(int criterion, bool ok, const std::string& label, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  g_all_ok = g_all_ok && ok;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

NoiseBundle noise_for(const ProblemSpec& spec, int steps, int paths, std::uint64_t seed) {
  const TimeGrid grid{spec.T, steps};
  return sample_noise_bundle(grid, paths, seed, spec.dims.d, spec.dims.l, spec.jumps);
}

double sup_error(const PathArray& arr, const TimeGrid& grid, double (*target)(double, double),
                 double x) {
  double worst = 0.0;
  for (int i = 0; i < arr.nodes(); ++i) {
    const double want = target(x, grid.t(i));
    for (int p = 0; p < arr.paths(); ++p)
      for (int c = 0; c < arr.block(); ++c)
        worst = std::max(worst, std::abs(arr.at(i, p)[c] - want));
  }
  return worst;
}

double worst_node_std(const PathArray& arr) {
  double worst = 0.0;
  for (int i = 0; i < arr.nodes(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (int p = 0; p < arr.paths(); ++p) {
      const double v = arr.at(i, p)[0];
      mean += v;
      sq += v * v;
    }
    mean /= arr.paths();
    worst = std::max(worst, std::sqrt(std::max(0.0, sq / arr.paths() - mean * mean)));
  }
  return worst;
}

double flat(double x, double) { return x; }
double dual_p(double x, double t) { return -x * (1.0 + t); }
double dual_P(double x, double t) { return x * (4.0 - t); }

AdjointPaths closed_form_dual(const ProblemSpec& spec, const TimeGrid& grid, int paths, double x) {
  AdjointPaths adj = AdjointPaths::zeros(spec.dims, spec.marks(), grid, paths);
  for (int i = 0; i <= grid.steps; ++i) {
    for (int p = 0; p < paths; ++p) {
      adj.p.at(i, p)[0] = dual_p(x, grid.t(i));
      adj.P.at(i, p)[0] = dual_P(x, grid.t(i));
    }
  }
  return adj;
}

// Central-difference check of every Hamiltonian gradient entry at one random
// point; returns the worst relative error.
double gradient_fd_error(const ProblemSpec& spec, Rng& rng) {
  const int J = spec.marks();
  StateValue s = StateValue::zero(spec.dims, J);
  AdjointValue a = AdjointValue::zero(spec.dims, J);
  for (auto* vec : {&s.y, &s.Y}) {
    for (Eigen::Index i = 0; i < vec->size(); ++i) (*vec)[i] = 0.7 * rng.gaussian();
  }
  for (auto* mat : {&s.z, &s.Z, &s.k}) {
    for (Eigen::Index i = 0; i < mat->size(); ++i) mat->data()[i] = 0.7 * rng.gaussian();
  }
  for (auto* vec : {&a.p, &a.P}) {
    for (Eigen::Index i = 0; i < vec->size(); ++i) (*vec)[i] = 0.7 * rng.gaussian();
  }
  for (auto* mat : {&a.q, &a.Q, &a.V}) {
    for (Eigen::Index i = 0; i < mat->size(); ++i) mat->data()[i] = 0.7 * rng.gaussian();
  }
  Vec v(spec.dims.r);
  for (int i = 0; i < spec.dims.r; ++i) v[i] = 0.4 * rng.gaussian();
  v = spec.controls.project(v);
  const double t = rng.uniform01() * spec.T;

  HamiltonianGradients grad;
  grad.resize(spec.dims, J);
  const AdjointView av = view_of(a, spec.dims, J);
  eval_hamiltonian_gradients(spec, t, s.view(), av, v, grad);

  const double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](double analytic, double* slot) {
    const double keep = *slot;
    *slot = keep + h;
    const double up = eval_hamiltonian(spec, t, s.view(), av, v);
    *slot = keep - h;
    const double dn = eval_hamiltonian(spec, t, s.view(), av, v);
    *slot = keep;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
  };

  for (int i = 0; i < spec.dims.n; ++i) probe(grad.y[i], s.y.data() + i);
  for (int i = 0; i < spec.dims.m; ++i) probe(grad.Y[i], s.Y.data() + i);
  for (int i = 0; i < spec.dims.n * spec.dims.l; ++i) probe(grad.z[i], s.z.data() + i);
  for (int i = 0; i < spec.dims.m * spec.dims.d; ++i) probe(grad.Z[i], s.Z.data() + i);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < spec.dims.m; ++i)
      probe(grad.k[j * spec.dims.m + i] * spec.jumps.weights[j],
            s.k.data() + j * spec.dims.m + i);
  for (int i = 0; i < spec.dims.r; ++i) probe(grad.v[i], v.data() + i);
  return worst;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::map<std::string, std::string> artifact_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    out[name] = slurp(entry.path());
  }
  return out;
}

}  // namespace

int main() {
  const ProblemSpec spec = build_lq_problem(catalog_problem("example31"));
  const double x = spec.x0[0];
  const int N = 50, M = 4000;
  const TimeGrid grid{spec.T, N};
  const NoiseBundle noise = noise_for(spec, N, M, 7);
  const ControlProcess ustar = ControlProcess::constant(Vec::Zero(1), N + 1);

  // Criterion 1: benchmark state recovery at the canonical resolution.
  const auto t0 = std::chrono::steady_clock::now();
  StatePaths state;
  const SolveReport solve_rep = solve_fbdsde(spec, ustar, noise, SolveOptions{}, state);
  const double solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double y_sup = sup_error(state.y, grid, flat, x);
  const double Y_sup = sup_error(state.Y, grid, flat, x);
  const DiscreteNorm norm = m2_norm(state, spec.jumps);
  {
    const bool ok = solve_rep.converged && y_sup <= 0.05 && Y_sup <= 0.05 && norm.z <= 0.05 &&
                    norm.Z <= 0.05 && norm.k <= 0.05 && solve_seconds <= 60.0;
    report(1, ok, "benchmark state recovery",
           fmt("y_sup=%.4f Y_sup=%.4f z=%.4f Z=%.4f k=%.4f %.1fs", y_sup, Y_sup, norm.z, norm.Z,
               norm.k, solve_seconds));
  }

  // Criterion 2: adjoint recovery against the closed-form dual pair.
  AdjointPaths adj;
  const SolveReport adj_rep = solve_adjoint(spec, ustar, noise, state, SolveOptions{}, adj);
  {
    const double p_sup = sup_error(adj.p, grid, dual_p, x);
    const double P_sup = sup_error(adj.P, grid, dual_P, x);
    const double p_std = worst_node_std(adj.p);
    const double P_std = worst_node_std(adj.P);
    const double dt = grid.dt();
    const double q_m2 = process_m2(adj.q, dt, spec.dims.m, spec.dims.l, nullptr);
    const double Q_m2 = process_m2(adj.Q, dt, spec.dims.n, spec.dims.d, nullptr);
    const double V_m2 =
        process_m2(adj.V, dt, spec.dims.n, spec.marks(), spec.jumps.weights.data());
    const bool ok = adj_rep.converged && p_sup <= 0.05 && P_sup <= 0.05 && p_std <= 0.02 &&
                    P_std <= 0.02 && q_m2 <= 0.05 && Q_m2 <= 0.05 && V_m2 <= 0.05;
    report(2, ok, "adjoint recovery",
           fmt("p_sup=%.4f P_sup=%.4f p_std=%.4f P_std=%.4f q=%.4f Q=%.4f V=%.4f", p_sup, P_sup,
               p_std, P_std, q_m2, Q_m2, V_m2));
  }

  // Criterion 3: cost of the optimal control equals 2 x^2 within 0.1.
  {
    const CostEstimate cost = cost_of_state(spec, ustar, noise, state);
    const double err = std::abs(cost.value - 2.0 * x * x);
    report(3, err <= 0.1, "optimal cost value",
           fmt("J=%.4f err=%.4f se=%.4f", cost.value, err, cost.se));
  }

  // Criterion 4: H(v) - H(u*) <= 1e-8 over the 41-point control grid along
  // the solved trajectory, with the closed-form dual pair (the linear terms
  // cancel exactly, leaving -v^2/2).
  {
    const AdjointPaths dual = closed_form_dual(spec, grid, M, x);
    const MaximumConditionReport mc = check_maximum_condition(spec, state, dual, ustar, 41, 8, 1e-8);
    report(4, mc.holds, "pointwise maximum condition",
           fmt("worst_gap=%.3e probes=%d", mc.worst_gap, mc.probes));
  }

  // Criterion 5: ascent from u = 0.5 lands within 0.05 of zero with a
  // non-increasing cost trace under common random numbers.
  {
    const NoiseBundle onoise = noise_for(spec, 25, 1000, 7);
    ControlProcess u = ControlProcess::constant(Vec::Constant(1, 0.5), 26);
    OptimizeOptions oopt;
    const OptimizeReport rep = optimize_control(spec, onoise, oopt, u);
    const double usup = u.values().cwiseAbs().maxCoeff();
    bool monotone = true;
    for (size_t i = 1; i < rep.cost_trace.size(); ++i)
      monotone = monotone && rep.cost_trace[i] <= rep.cost_trace[i - 1] + 1e-9;
    const bool ok = usup <= 0.05 && rep.iterations <= 200 && monotone;
    report(5, ok, "optimizer reaches the known optimum",
           fmt("sup|u|=%.4f iters=%d stop=%s monotone=%s", usup, rep.iterations,
               rep.stop_reason.c_str(), monotone ? "yes" : "no"));
  }

  // Criterion 6: analytic Hamiltonian gradients vs central differences, 100
  // probes on two catalog problems.
  {
    double worst = 0.0;
    for (const char* name : {"example31", "monotone-dissipative"}) {
      const ProblemSpec prob = build_lq_problem(catalog_problem(name));
      Rng rng(314159, 9);
      for (int probe = 0; probe < 100; ++probe)
        worst = std::max(worst, gradient_fd_error(prob, rng));
    }
    report(6, worst <= 1e-6, "hamiltonian gradient finite-difference agreement",
           fmt("worst_rel=%.3e probes=200", worst));
  }

  // Criterion 7: discrete product rule on three integrand sets; the backward
  // correction must carry its negative sign.
  {
    const NoiseBundle pnoise =
        sample_noise_bundle(TimeGrid{1.0, 20}, 4000, 2025, 1, 1, spec.jumps);
    auto random_set = [&](std::uint64_t stream, int dim) {
      ItoIntegrands io = ItoIntegrands::zeros(dim, pnoise);
      Rng rng(6, (1ull << 41) + stream);
      for (auto* arr : {&io.alpha0, &io.beta, &io.gamma, &io.delta, &io.K})
        for (double& entry : arr->data()) entry = 0.4 * rng.gaussian();
      return io;
    };

    bool ok = true;
    std::string detail;

    // Set 1: independent random integrands.
    {
      const ProductRuleReport rep =
          check_discrete_product_rule(random_set(1, 2), random_set(2, 2), pnoise);
      ok = ok && rep.pathwise_residual <= 1e-10 &&
           std::abs(rep.expectation_residual) <= 3.0 * rep.se + 1e-12;
      detail += fmt("rand(path=%.1e res=%.1e/3se=%.1e) ", rep.pathwise_residual,
                    std::abs(rep.expectation_residual), 3.0 * rep.se);
    }
    // Set 2: pure backward pair; flipping the correction sign would shift the
    // residual by 2T, far outside the noise band.
    {
      ItoIntegrands a = ItoIntegrands::zeros(1, pnoise);
      for (double& entry : a.gamma.data()) entry = 1.0;
      const ProductRuleReport rep = check_discrete_product_rule(a, a, pnoise);
      const double flipped = rep.expectation_residual - 2.0;
      ok = ok && rep.pathwise_residual <= 1e-10 &&
           std::abs(rep.expectation_residual) <= 3.0 * rep.se + 1e-12 &&
           std::abs(flipped) > 10.0 * rep.se + 1.0;
      detail += fmt("backward(res=%.1e flipped=%.2f) ", std::abs(rep.expectation_residual),
                    flipped);
    }
    // Set 3: deterministic mixed integrands hitting every channel.
    {
      ItoIntegrands a = ItoIntegrands::zeros(2, pnoise);
      ItoIntegrands b = ItoIntegrands::zeros(2, pnoise);
      for (double& entry : a.beta.data()) entry = 0.3;
      for (double& entry : a.gamma.data()) entry = 0.8;
      for (double& entry : a.delta.data()) entry = -0.5;
      for (double& entry : b.gamma.data()) entry = -0.6;
      for (double& entry : b.delta.data()) entry = 0.4;
      for (double& entry : b.K.data()) entry = 0.7;
      for (int p = 0; p < pnoise.paths; ++p) {
        a.alpha0.at(0, p)[0] = 0.2;
        b.alpha0.at(0, p)[1] = -0.1;
      }
      const ProductRuleReport rep = check_discrete_product_rule(a, b, pnoise);
      ok = ok && rep.pathwise_residual <= 1e-10 &&
           std::abs(rep.expectation_residual) <= 3.0 * rep.se + 1e-12;
      detail += fmt("mixed(path=%.1e res=%.1e/3se=%.1e)", rep.pathwise_residual,
                    std::abs(rep.expectation_residual), 3.0 * rep.se);
    }
    report(7, ok, "discrete product rule with signed corrections", detail);
  }

  // Criterion 8: duality residuals bounded by 3SE + C dt and shrinking by at
  // least 1.5x when the grid doubles; C comes from the coarse run.
  {
    const ControlProcess v50 = ControlProcess::constant(Vec::Constant(1, 0.5), 51);
    const ControlProcess u100 = ControlProcess::constant(Vec::Zero(1), 101);
    const ControlProcess v100 = ControlProcess::constant(Vec::Constant(1, 0.5), 101);
    const NoiseBundle coarse = noise_for(spec, 50, 4000, 7);
    const NoiseBundle fine = noise_for(spec, 100, 4000, 7);
    const DualityReport d50 = check_duality(spec, ustar, v50, coarse, SolveOptions{});
    const DualityReport dfine = check_duality(spec, u100, v100, fine, SolveOptions{});

    const double Cb = std::abs(d50.backward_residual) / coarse.dt();
    const double Cf = std::abs(d50.forward_residual) / coarse.dt();
    const bool fine_ok =
        std::abs(dfine.backward_residual) <= 3.0 * dfine.backward_se + Cb * fine.dt() &&
        std::abs(dfine.forward_residual) <= 3.0 * dfine.forward_se + Cf * fine.dt();
    const double shrink_b =
        std::abs(d50.backward_residual) / std::max(1e-300, std::abs(dfine.backward_residual));
    const double shrink_f =
        std::abs(d50.forward_residual) / std::max(1e-300, std::abs(dfine.forward_residual));
    const bool ok = fine_ok && shrink_b >= 1.5 && shrink_f >= 1.5 &&
                    d50.terminal_cancellation <= 1e-10 && dfine.terminal_cancellation <= 1e-10;
    report(8, ok, "duality identity residuals",
           fmt("back %.2e->%.2e (x%.2f) fwd %.2e->%.2e (x%.2f)", d50.backward_residual,
               dfine.backward_residual, shrink_b, d50.forward_residual, dfine.forward_residual,
               shrink_f));
  }

  // Criterion 9: monotonicity regimes over 10^4 sampled increments.
  {
    const MonotonicityReport mono =
        audit_monotonicity(build_lq_problem(catalog_problem("monotone-dissipative")), 10000, 1);
    const MonotonicityReport anti =
        audit_monotonicity(build_lq_problem(catalog_problem("anti-monotone")), 10000, 1);
    const MonotonicityReport open_case = audit_monotonicity(spec, 10000, 1);
    const bool ok = mono.regime == "A1" && mono.mu1 >= 0.95 && mono.mu1 <= 1.0 &&
                    mono.mu2 >= 0.95 && mono.mu2 <= 1.0 && anti.regime == "A1-prime" &&
                    !open_case.regime.empty();
    report(9, ok, "monotonicity regimes",
           fmt("dissipative=%s mu=(%.3f,%.3f) reversed=%s benchmark=%s", mono.regime.c_str(),
               mono.mu1, mono.mu2, anti.regime.c_str(), open_case.regime.c_str()));
  }

  // Criterion 10: verify-example twice with one seed is byte-identical.
  {
    const fs::path base = fs::temp_directory_path() / "fbdsde_acceptance_det";
    fs::remove_all(base);
    auto config = [&](const std::string& leaf) {
      return std::string("{\"mode\":\"verify-example\",\"problem\":{\"catalog\":\"example31\"},") +
             "\"steps\":50,\"paths\":4000,\"seed\":7,\"out_dir\":\"" + (base / leaf).string() +
             "\"}";
    };
    const RunResult ra = run_pipeline(config("a"));
    const RunResult rb = run_pipeline(config("b"));
    const auto fa = artifact_bytes(base / "a");
    const auto fb = artifact_bytes(base / "b");
    bool identical = ra.exit_code == rb.exit_code && fa.size() == fb.size() && !fa.empty();
    for (const auto& [name, bytes] : fa) {
      const auto it = fb.find(name);
      identical = identical && it != fb.end() && it->second == bytes;
    }
    const nlohmann::json ma = nlohmann::json::parse(slurp(base / "a" / "manifest.json"));
    const nlohmann::json mb = nlohmann::json::parse(slurp(base / "b" / "manifest.json"));
    identical = identical && ma.at("files") == mb.at("files");
    report(10, identical, "verify-example determinism",
           fmt("files=%zu exit=%d/%d", fa.size(), ra.exit_code, rb.exit_code));
    fs::remove_all(base);
  }

  std::printf("%s\n", g_all_ok ? "acceptance: all criteria passed" : "acceptance: FAILURES above");
  return g_all_ok ? 0 : 1;
}
