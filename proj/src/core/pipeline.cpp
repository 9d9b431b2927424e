#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/adjoint.hpp"
#include "core/audit.hpp"
#include "core/catalog.hpp"
#include "core/config.hpp"
#include "core/io.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/norms.hpp"
#include "core/optimizer.hpp"
#include "core/product_rule.hpp"
#include "core/rng.hpp"
#include "core/solver.hpp"

namespace fbdsde {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void reject_unknown_keys(const json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw ConfigParseError(std::string("run config: unknown key '") + it.key() + "' in " +
                             where);
  }
}

Vec parse_vec(const json& arr, const char* where) {
  if (!arr.is_array())
    throw ConfigParseError(std::string("run config: ") + where + " must be an array");
  Vec v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) {
    if (!x.is_number())
      throw ConfigParseError(std::string("run config: ") + where + " must hold numbers");
    v[i++] = x.get<double>();
  }
  return v;
}

struct RunConfig {
  std::string mode;
  std::string catalog;
  std::string config_path;
  std::string inline_config;  // serialized problem object
  int steps = 50;
  int paths = 4000;
  std::uint64_t seed = 7;
  bool has_x0 = false;
  Vec x0;
  SolveOptions solve;
  bool has_control = false;
  Vec control_value;
  std::string out_dir = "out";
  int sample_paths = 16;
  bool dump_noise = false;
  OptimizeOptions optimize;
  bool has_start = false;
  Vec start;
  CertifyOptions certify;
  bool has_compare = false;
  Vec compare;

  RunConfig() {
    // The audit scans the Hamiltonian with an estimated adjoint, whose
    // pointwise noise shows up quadratically in the gap; at the default
    // resolution that floor sits near 1e-2, so the library's exact-arithmetic
    // default would reject every Monte Carlo run. Explicit
    // audit.max_condition_tol still overrides this.
    certify.max_condition_tol = 0.02;
  }
};

RunConfig parse_run_config(const json& root) {
  if (!root.is_object()) throw ConfigParseError("run config: root must be an object");
  reject_unknown_keys(root, "the root",
                      {"mode", "problem", "steps", "paths", "seed", "x0", "solve", "control",
                       "out_dir", "sample_paths", "dump_noise", "optimize", "audit",
                       "identities"});
  RunConfig rc;
  if (!root.contains("mode") || !root["mode"].is_string())
    throw ConfigParseError("run config: 'mode' is required and must be a string");
  rc.mode = root["mode"].get<std::string>();

  if (!root.contains("problem") || !root["problem"].is_object())
    throw ConfigParseError("run config: 'problem' is required and must be an object");
  const json& prob = root["problem"];
  reject_unknown_keys(prob, "problem", {"catalog", "config_path", "inline"});
  int sources = 0;
  if (prob.contains("catalog")) {
    rc.catalog = prob["catalog"].get<std::string>();
    ++sources;
  }
  if (prob.contains("config_path")) {
    rc.config_path = prob["config_path"].get<std::string>();
    ++sources;
  }
  if (prob.contains("inline")) {
    rc.inline_config = prob["inline"].dump();
    ++sources;
  }
  if (sources != 1)
    throw ConfigParseError(
        "run config: problem must name exactly one of catalog, config_path, inline");

  if (root.contains("steps")) rc.steps = root["steps"].get<int>();
  if (root.contains("paths")) rc.paths = root["paths"].get<int>();
  if (root.contains("seed")) rc.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("x0")) {
    rc.x0 = parse_vec(root["x0"], "x0");
    rc.has_x0 = true;
  }
  if (root.contains("solve")) {
    const json& s = root["solve"];
    reject_unknown_keys(s, "solve", {"theta", "tol", "max_iter", "basis_degree"});
    if (s.contains("theta")) rc.solve.theta = s["theta"].get<double>();
    if (s.contains("tol")) rc.solve.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) rc.solve.max_iter = s["max_iter"].get<int>();
    if (s.contains("basis_degree")) rc.solve.basis_degree = s["basis_degree"].get<int>();
  }
  if (root.contains("control")) {
    const json& c = root["control"];
    reject_unknown_keys(c, "control", {"constant"});
    if (!c.contains("constant"))
      throw ConfigParseError("run config: control currently supports only {\"constant\": [...]}");
    rc.control_value = parse_vec(c["constant"], "control.constant");
    rc.has_control = true;
  }
  if (root.contains("out_dir")) rc.out_dir = root["out_dir"].get<std::string>();
  if (root.contains("sample_paths")) rc.sample_paths = root["sample_paths"].get<int>();
  if (root.contains("dump_noise")) rc.dump_noise = root["dump_noise"].get<bool>();
  if (root.contains("optimize")) {
    const json& o = root["optimize"];
    reject_unknown_keys(o, "optimize",
                        {"max_iter", "step0", "step_cap", "min_step", "grad_tol", "start"});
    if (o.contains("max_iter")) rc.optimize.max_iter = o["max_iter"].get<int>();
    if (o.contains("step0")) rc.optimize.step0 = o["step0"].get<double>();
    if (o.contains("step_cap")) rc.optimize.step_cap = o["step_cap"].get<double>();
    if (o.contains("min_step")) rc.optimize.min_step = o["min_step"].get<double>();
    if (o.contains("grad_tol")) rc.optimize.grad_tol = o["grad_tol"].get<double>();
    if (o.contains("start")) {
      rc.start = parse_vec(o["start"], "optimize.start");
      rc.has_start = true;
    }
  }
  if (root.contains("audit")) {
    const json& a = root["audit"];
    reject_unknown_keys(a, "audit",
                        {"grid_points", "path_stride", "max_condition_tol", "shape_probes",
                         "monotonicity_samples", "gap_probes", "seed", "compare"});
    if (a.contains("grid_points")) rc.certify.grid_points = a["grid_points"].get<int>();
    if (a.contains("path_stride")) rc.certify.path_stride = a["path_stride"].get<int>();
    if (a.contains("max_condition_tol"))
      rc.certify.max_condition_tol = a["max_condition_tol"].get<double>();
    if (a.contains("shape_probes")) rc.certify.shape_probes = a["shape_probes"].get<int>();
    if (a.contains("monotonicity_samples"))
      rc.certify.monotonicity_samples = a["monotonicity_samples"].get<int>();
    if (a.contains("gap_probes")) rc.certify.gap_probes = a["gap_probes"].get<int>();
    if (a.contains("seed")) rc.certify.seed = a["seed"].get<std::uint64_t>();
    if (a.contains("compare")) {
      rc.compare = parse_vec(a["compare"], "audit.compare");
      rc.has_compare = true;
    }
  }
  if (root.contains("identities")) {
    const json& idn = root["identities"];
    reject_unknown_keys(idn, "identities", {"compare"});
    if (idn.contains("compare")) {
      rc.compare = parse_vec(idn["compare"], "identities.compare");
      rc.has_compare = true;
    }
  }
  return rc;
}

// Default comparison control: the region center pushed a quarter width up.
Vec default_compare(const ControlSet& controls, int r) {
  Vec v = controls.center(r);
  if (controls.kind == ControlSet::Kind::Box) {
    for (int i = 0; i < r; ++i) v[i] += 0.25 * (controls.hi[i] - controls.lo[i]);
  } else {
    v.array() += 0.25;
  }
  return controls.project(v);
}

json solve_report_json(const SolveReport& rep) {
  return json{{"converged", rep.converged},
              {"iterations", rep.iterations},
              {"changes", rep.changes},
              {"terminal_residual", rep.terminal_residual},
              {"max_condition", rep.max_condition},
              {"min_rank", rep.min_rank},
              {"worst_node", rep.worst_node}};
}

json norms_json(const StatePaths& state, const JumpMeasure& jumps) {
  DiscreteNorm norm = m2_norm(state, jumps);
  return json{{"total", norm.value}, {"y", norm.y}, {"Y", norm.Y},
              {"z", norm.z},         {"Z", norm.Z}, {"k", norm.k}};
}

json adjoint_norms_json(const AdjointPaths& adj, const JumpMeasure& jumps) {
  double dt = adj.grid.dt();
  return json{{"p_sup", sup_block_norm(adj.p)},
              {"P_sup", sup_block_norm(adj.P)},
              {"q_m2", process_m2(adj.q, dt, adj.dims.m, adj.dims.l, nullptr)},
              {"Q_m2", process_m2(adj.Q, dt, adj.dims.n, adj.dims.d, nullptr)},
              {"V_m2", process_m2(adj.V, dt, adj.dims.n, adj.jump_marks,
                                  jumps.weights.data())}};
}

json cost_json(const CostEstimate& est) {
  return json{{"value", est.value},       {"se", est.se},           {"running", est.running},
              {"terminal", est.terminal}, {"initial", est.initial}, {"converged", est.converged}};
}

json duality_json(const DualityReport& rep) {
  return json{{"backward_residual", rep.backward_residual},
              {"backward_se", rep.backward_se},
              {"forward_residual", rep.forward_residual},
              {"forward_se", rep.forward_se},
              {"gap_lhs", rep.gap_lhs},
              {"gap_rhs", rep.gap_rhs},
              {"gap_margin_se", rep.gap_margin_se},
              {"terminal_cancellation", rep.terminal_cancellation},
              {"paths", rep.paths}};
}

json monotonicity_json(const MonotonicityReport& rep) {
  return json{{"regime", rep.regime},           {"mu1", rep.mu1},
              {"mu2", rep.mu2},                 {"c", rep.c},
              {"bracket_min", rep.bracket_min}, {"bracket_max", rep.bracket_max},
              {"fit_residual", rep.fit_residual}, {"samples", rep.samples}};
}

json max_condition_json(const MaximumConditionReport& rep) {
  std::vector<double> worst(rep.worst_control.data(),
                            rep.worst_control.data() + rep.worst_control.size());
  return json{{"holds", rep.holds},           {"worst_gap", rep.worst_gap},
              {"worst_node", rep.worst_node}, {"worst_path", rep.worst_path},
              {"worst_control", worst},       {"probes", rep.probes}};
}

json certificate_json(const SufficiencyReport& rep) {
  return json{{"verdict", rep.verdict},
              {"solver_converged", rep.solver_converged},
              {"candidate_critical", rep.candidate_critical},
              {"hamiltonian_concave", rep.hamiltonian_concave},
              {"cost_convex", rep.cost_convex},
              {"gap_probes_pass", rep.gap_probes_pass},
              {"min_gap_margin", rep.min_gap_margin},
              {"max_condition", max_condition_json(rep.max_condition)},
              {"concavity", json{{"concave", rep.concavity.concave},
                                 {"min_margin", rep.concavity.min_margin},
                                 {"probes", rep.concavity.probes}}},
              {"convexity", json{{"convex", rep.convexity.convex},
                                 {"running_min", rep.convexity.running_min},
                                 {"terminal_min", rep.convexity.terminal_min},
                                 {"initial_min", rep.convexity.initial_min},
                                 {"probes", rep.convexity.probes}}},
              {"monotonicity", monotonicity_json(rep.monotonicity)},
              {"warnings", rep.warnings}};
}

json check_json(const std::string& name, bool pass, double value, double bound) {
  return json{{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}};
}

// Worst deviation of every block entry from a scalar closed form of t.
template <typename TargetFn>
double sup_deviation(const PathArray& arr, const TimeGrid& grid, TargetFn target) {
  double worst = 0.0;
  for (int i = 0; i < arr.nodes(); ++i) {
    double want = target(grid.t(i));
    for (int p = 0; p < arr.paths(); ++p) {
      const double* row = arr.at(i, p);
      for (int c = 0; c < arr.block(); ++c)
        worst = std::max(worst, std::abs(row[c] - want));
    }
  }
  return worst;
}

// Streams live far above the per-path streams the noise sampler uses, so the
// integrands stay independent of every Brownian/Poisson increment.
ItoIntegrands random_integrands(int dim, const NoiseBundle& noise, std::uint64_t stream) {
  ItoIntegrands a = ItoIntegrands::zeros(dim, noise);
  Rng rng(noise.seed, (1ull << 40) + stream);
  for (auto* arr : {&a.alpha0, &a.beta, &a.gamma, &a.delta, &a.K})
    for (double& x : arr->data()) x = 0.3 * rng.gaussian();
  return a;
}

std::string report_file_name(const std::string& mode) {
  if (mode == "verify-example") return "verify_report.json";
  return mode + "_report.json";
}

}  // namespace

RunResult run_pipeline(const std::string& run_config_json) {
  json root;
  try {
    root = json::parse(run_config_json);
  } catch (const json::exception& err) {
    throw ConfigParseError(std::string("run config: ") + err.what());
  }
  RunConfig rc = parse_run_config(root);

  static const char* kModes[] = {"solve", "adjoint", "audit", "optimize", "identities",
                                 "verify-example"};
  if (std::find_if(std::begin(kModes), std::end(kModes),
                   [&](const char* m) { return rc.mode == m; }) == std::end(kModes))
    throw ConfigParseError("run config: unknown mode '" + rc.mode + "'");
  if (rc.steps < 1 || rc.paths < 1)
    throw std::invalid_argument("run config: steps and paths must be positive");
  if (rc.sample_paths < 0) throw std::invalid_argument("run config: sample_paths must be >= 0");

  LqProblem lq = !rc.catalog.empty()       ? catalog_problem(rc.catalog)
                 : !rc.config_path.empty() ? load_lq_config(rc.config_path)
                                           : parse_lq_config(rc.inline_config);
  if (rc.has_x0) lq.x0 = rc.x0;
  ProblemSpec spec = build_lq_problem(lq);
  const std::string config_text = lq_config_to_json(lq);

  const Dimensions& dims = spec.dims;
  const int N = rc.steps;
  TimeGrid grid{spec.T, N};
  NoiseBundle noise = sample_noise_bundle(grid, rc.paths, rc.seed, dims.d, dims.l, spec.jumps);

  auto make_constant = [&](const Vec& value, const char* what) {
    if (value.size() != dims.r)
      throw std::invalid_argument(std::string("run config: ") + what + " must have length " +
                                  std::to_string(dims.r));
    return ControlProcess::constant(spec.controls.project(value), N + 1);
  };
  Vec base_value = rc.has_control ? rc.control_value : spec.controls.center(dims.r);

  json report;
  report["mode"] = rc.mode;
  report["problem"] = spec.name;
  report["steps"] = rc.steps;
  report["paths"] = rc.paths;
  report["seed"] = rc.seed;
  report["version"] = kVersion;

  std::map<std::string, std::string> artifacts;
  int exit_code = 0;

  if (rc.mode == "solve") {
    ControlProcess u = make_constant(base_value, "control.constant");
    StatePaths state;
    SolveReport rep = solve_fbdsde(spec, u, noise, rc.solve, state);
    CostEstimate cost = cost_of_state(spec, u, noise, state);
    cost.converged = rep.converged;
    report["solve"] = solve_report_json(rep);
    report["norms"] = norms_json(state, spec.jumps);
    report["cost"] = cost_json(cost);
    artifacts["state_summary.csv"] = state_summary_csv(state);
    artifacts["state_sample.csv"] = state_sample_csv(state, rc.sample_paths);
    artifacts["control.csv"] = control_csv(u, grid);
    exit_code = rep.converged ? 0 : 1;
  } else if (rc.mode == "adjoint") {
    ControlProcess u = make_constant(base_value, "control.constant");
    StatePaths state;
    SolveReport rep = solve_fbdsde(spec, u, noise, rc.solve, state);
    AdjointPaths adj;
    SolveReport arep = solve_adjoint(spec, u, noise, state, rc.solve, adj);
    report["solve"] = solve_report_json(rep);
    report["adjoint"] = solve_report_json(arep);
    report["norms"] = norms_json(state, spec.jumps);
    report["adjoint_norms"] = adjoint_norms_json(adj, spec.jumps);
    artifacts["state_summary.csv"] = state_summary_csv(state);
    artifacts["state_sample.csv"] = state_sample_csv(state, rc.sample_paths);
    artifacts["adjoint_summary.csv"] = adjoint_summary_csv(adj);
    artifacts["adjoint_sample.csv"] = adjoint_sample_csv(adj, rc.sample_paths);
    artifacts["control.csv"] = control_csv(u, grid);
    exit_code = rep.converged && arep.converged ? 0 : 1;
  } else if (rc.mode == "audit") {
    ControlProcess u = make_constant(base_value, "control.constant");
    CertifyOptions copt = rc.certify;
    copt.solve = rc.solve;
    SufficiencyReport cert = certify_control(spec, u, noise, copt);
    Vec cmp = rc.has_compare ? rc.compare : default_compare(spec.controls, dims.r);
    ControlProcess v = make_constant(cmp, "audit.compare");
    DualityReport dual = check_duality(spec, u, v, noise, rc.solve);
    report["certificate"] = certificate_json(cert);
    report["duality"] = duality_json(dual);
    exit_code = cert.verdict ? 0 : 1;
  } else if (rc.mode == "optimize") {
    Vec start = rc.has_start ? rc.start : base_value;
    ControlProcess u = make_constant(start, "optimize.start");
    OptimizeOptions oopt = rc.optimize;
    oopt.solve = rc.solve;
    OptimizeReport rep = optimize_control(spec, noise, oopt, u);
    double usup = u.values().cwiseAbs().maxCoeff();
    report["optimize"] = json{{"converged", rep.converged},
                              {"stop_reason", rep.stop_reason},
                              {"iterations", rep.iterations},
                              {"cost_trace", rep.cost_trace},
                              {"grad_trace", rep.grad_trace},
                              {"final_cost", rep.final_cost},
                              {"final_cost_se", rep.final_cost_se},
                              {"final_grad_norm", rep.final_grad_norm},
                              {"control_sup", usup}};
    artifacts["control.csv"] = control_csv(u, grid);
    exit_code = rep.converged ? 0 : 1;
  } else if (rc.mode == "identities") {
    ItoIntegrands ia = random_integrands(2, noise, 101);
    ItoIntegrands ib = random_integrands(2, noise, 103);
    ProductRuleReport pr = check_discrete_product_rule(ia, ib, noise);
    ControlProcess u = make_constant(base_value, "control.constant");
    Vec cmp = rc.has_compare ? rc.compare : default_compare(spec.controls, dims.r);
    ControlProcess v = make_constant(cmp, "identities.compare");
    DualityReport dual = check_duality(spec, u, v, noise, rc.solve);
    bool pathwise_ok = pr.pathwise_residual <= 1e-10;
    bool expectation_ok = std::abs(pr.expectation_residual) <= 3.0 * pr.se + 1e-12;
    report["product_rule"] = json{{"pathwise_residual", pr.pathwise_residual},
                                  {"expectation_lhs", pr.expectation_lhs},
                                  {"expectation_rhs", pr.expectation_rhs},
                                  {"expectation_residual", pr.expectation_residual},
                                  {"se", pr.se},
                                  {"paths", pr.paths},
                                  {"steps", pr.steps}};
    report["duality"] = duality_json(dual);
    report["checks"] = json::array({check_json("product_rule_pathwise", pathwise_ok,
                                               pr.pathwise_residual, 1e-10),
                                    check_json("product_rule_expectation", expectation_ok,
                                               std::abs(pr.expectation_residual),
                                               3.0 * pr.se + 1e-12)});
    exit_code = pathwise_ok && expectation_ok ? 0 : 1;
  } else {  // verify-example
    if (spec.name != "example31")
      throw std::invalid_argument(
          "run config: verify-example checks the example31 catalog problem, got '" + spec.name +
          "'");
    const double x = spec.x0[0];
    ControlProcess u = ControlProcess::constant(spec.controls.center(dims.r), N + 1);
    StatePaths state;
    SolveReport rep = solve_fbdsde(spec, u, noise, rc.solve, state);
    AdjointPaths adj;
    SolveReport arep = solve_adjoint(spec, u, noise, state, rc.solve, adj);
    CostEstimate cost = cost_of_state(spec, u, noise, state);
    DiscreteNorm norm = m2_norm(state, spec.jumps);

    // The Hamiltonian gap is checked against the closed-form dual pair: with
    // it the linear terms cancel exactly and the gap is -v^2/2 for any state,
    // so the 1e-8 tolerance is meaningful. An estimated adjoint would add a
    // noise term linear in v that no grid tolerance this tight survives.
    AdjointPaths exact_dual =
        AdjointPaths::zeros(dims, spec.marks(), grid, noise.paths);
    for (int i = 0; i <= N; ++i) {
      const double t = grid.t(i);
      for (int p = 0; p < noise.paths; ++p) {
        exact_dual.p.at(i, p)[0] = -x * (1.0 + t);
        exact_dual.P.at(i, p)[0] = x * (4.0 - t);
      }
    }
    MaximumConditionReport mc = check_maximum_condition(spec, state, exact_dual, u, 41, 64, 1e-8);

    double y_sup = sup_deviation(state.y, grid, [&](double) { return x; });
    double Y_sup = sup_deviation(state.Y, grid, [&](double) { return x; });
    double p_sup = sup_deviation(adj.p, grid, [&](double t) { return -x * (1.0 + t); });
    double P_sup = sup_deviation(adj.P, grid, [&](double t) { return x * (4.0 - t); });
    double dt = grid.dt();
    double q_m2 = process_m2(adj.q, dt, dims.m, dims.l, nullptr);
    double Q_m2 = process_m2(adj.Q, dt, dims.n, dims.d, nullptr);
    double V_m2 = process_m2(adj.V, dt, dims.n, spec.marks(), spec.jumps.weights.data());
    double cost_err = std::abs(cost.value - 2.0 * x * x);
    double cost_bound = 0.1;

    json checks = json::array();
    checks.push_back(check_json("solver_converged", rep.converged && arep.converged,
                                rep.converged && arep.converged ? 1.0 : 0.0, 1.0));
    checks.push_back(check_json("state_y_sup_error", y_sup <= 0.05, y_sup, 0.05));
    checks.push_back(check_json("state_Y_sup_error", Y_sup <= 0.05, Y_sup, 0.05));
    checks.push_back(check_json("state_z_norm", norm.z <= 0.05, norm.z, 0.05));
    checks.push_back(check_json("state_Z_norm", norm.Z <= 0.05, norm.Z, 0.05));
    checks.push_back(check_json("state_k_norm", norm.k <= 0.05, norm.k, 0.05));
    checks.push_back(check_json("adjoint_p_sup_error", p_sup <= 0.05, p_sup, 0.05));
    checks.push_back(check_json("adjoint_P_sup_error", P_sup <= 0.05, P_sup, 0.05));
    checks.push_back(check_json("adjoint_q_norm", q_m2 <= 0.05, q_m2, 0.05));
    checks.push_back(check_json("adjoint_Q_norm", Q_m2 <= 0.05, Q_m2, 0.05));
    checks.push_back(check_json("adjoint_V_norm", V_m2 <= 0.05, V_m2, 0.05));
    checks.push_back(check_json("cost_error", cost_err <= cost_bound, cost_err, cost_bound));
    checks.push_back(check_json("maximum_condition", mc.holds, mc.worst_gap, 1e-8));

    bool all_pass = true;
    for (const auto& c : checks) all_pass = all_pass && c["pass"].get<bool>();
    report["solve"] = solve_report_json(rep);
    report["adjoint"] = solve_report_json(arep);
    report["cost"] = cost_json(cost);
    report["max_condition"] = max_condition_json(mc);
    report["checks"] = checks;
    report["pass"] = all_pass;
    artifacts["state_summary.csv"] = state_summary_csv(state);
    artifacts["state_sample.csv"] = state_sample_csv(state, rc.sample_paths);
    artifacts["adjoint_summary.csv"] = adjoint_summary_csv(adj);
    artifacts["adjoint_sample.csv"] = adjoint_sample_csv(adj, rc.sample_paths);
    artifacts["control.csv"] = control_csv(u, grid);
    exit_code = all_pass ? 0 : 1;
  }

  std::filesystem::create_directories(rc.out_dir);
  if (rc.dump_noise) {
    std::string noise_path = (std::filesystem::path(rc.out_dir) / "noise.bin").string();
    write_noise_bundle(noise, noise_path);
    artifacts["noise.bin"] = read_text_file(noise_path);
  }

  const std::string report_text = report.dump(2) + "\n";
  artifacts[report_file_name(rc.mode)] = report_text;
  artifacts["resolved_config.json"] = config_text;

  json files = json::object();
  for (const auto& [name, content] : artifacts) {
    write_text_file((std::filesystem::path(rc.out_dir) / name).string(), content);
    files[name] = sha256_hex(content);
  }
  json manifest{{"version", kVersion},
                {"mode", rc.mode},
                {"config_sha256", sha256_hex(config_text)},
                {"created_unix", static_cast<std::int64_t>(std::time(nullptr))},
                {"files", files}};
  write_text_file((std::filesystem::path(rc.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");

  return RunResult{exit_code, report_text, rc.out_dir};
}

}  // namespace fbdsde
