// Command line front end. Talks to the library exclusively through the C API:
// every subcommand assembles a run-config JSON document and hands it to
// fbdsde_run_json, so the CLI exercises the same entry point an embedding
// application would use.
//
// Exit codes: 0 run succeeded and all embedded checks passed, 1 a check or
// the solver failed, 2 usage error, 3 the input could not be parsed or
// validated.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "fbdsde/fbdsde.h"

namespace {

using nlohmann::json;

struct CliArgs {
  std::string catalog = "example31";
  std::string config_path;
  int steps = 50;
  int paths = 4000;
  unsigned long long seed = 7;
  std::vector<double> x0;
  double theta = 0.5;
  double tol = 1e-4;
  int max_iter = 50;
  int basis_degree = 2;
  std::vector<double> control;
  std::string out_dir = "out";
  int sample_paths = 16;
  bool dump_noise = false;

  // optimize
  std::vector<double> start;
  int opt_max_iter = 200;
  double step0 = 1.0;
  double step_cap = 8.0;
  double min_step = 1e-6;
  double grad_tol = 1e-3;

  // audit / identities
  int grid_points = 41;
  int path_stride = 64;
  double max_condition_tol = 1e-8;
  int shape_probes = 200;
  int monotonicity_samples = 10000;
  int gap_probes = 2;
  unsigned long long audit_seed = 1;
  std::vector<double> compare;
};

void add_common_options(CLI::App* cmd, CliArgs& a) {
  cmd->add_option("--catalog", a.catalog, "Built-in problem name")->capture_default_str();
  cmd->add_option("--config", a.config_path, "Problem definition JSON file (overrides --catalog)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--steps", a.steps, "Time steps")->capture_default_str();
  cmd->add_option("--paths", a.paths, "Monte Carlo paths")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Noise seed")->capture_default_str();
  cmd->add_option("--x0,--x", a.x0, "Initial forward state (overrides the problem file)");
  cmd->add_option("--theta", a.theta, "Picard damping factor")->capture_default_str();
  cmd->add_option("--tol", a.tol, "Picard convergence tolerance")->capture_default_str();
  cmd->add_option("--max-iter", a.max_iter, "Picard iteration cap")->capture_default_str();
  cmd->add_option("--basis-degree", a.basis_degree, "Regression basis total degree")
      ->capture_default_str();
  cmd->add_option("--control", a.control, "Constant control value (defaults to the set center)");
  cmd->add_option("--out", a.out_dir, "Artifact directory")->capture_default_str();
  cmd->add_option("--sample-paths", a.sample_paths, "Paths written to the sample CSVs")
      ->capture_default_str();
  cmd->add_flag("--dump-noise", a.dump_noise, "Also write the noise bundle to the artifact dir");
}

void add_compare_option(CLI::App* cmd, CliArgs& a) {
  cmd->add_option("--compare", a.compare,
                  "Comparison control for the duality residuals (defaults to an off-center value)");
}

json build_run_config(const std::string& mode, const CliArgs& a) {
  json j;
  j["mode"] = mode;
  if (!a.config_path.empty())
    j["problem"] = json{{"config_path", a.config_path}};
  else
    j["problem"] = json{{"catalog", a.catalog}};
  j["steps"] = a.steps;
  j["paths"] = a.paths;
  j["seed"] = a.seed;
  if (!a.x0.empty()) j["x0"] = a.x0;
  j["solve"] = json{{"theta", a.theta},
                    {"tol", a.tol},
                    {"max_iter", a.max_iter},
                    {"basis_degree", a.basis_degree}};
  if (!a.control.empty()) j["control"] = json{{"constant", a.control}};
  j["out_dir"] = a.out_dir;
  j["sample_paths"] = a.sample_paths;
  if (a.dump_noise) j["dump_noise"] = true;
  if (mode == "optimize") {
    json opt{{"max_iter", a.opt_max_iter},
             {"step0", a.step0},
             {"step_cap", a.step_cap},
             {"min_step", a.min_step},
             {"grad_tol", a.grad_tol}};
    if (!a.start.empty()) opt["start"] = a.start;
    j["optimize"] = opt;
  }
  if (mode == "audit") {
    json audit{{"grid_points", a.grid_points},
               {"path_stride", a.path_stride},
               {"max_condition_tol", a.max_condition_tol},
               {"shape_probes", a.shape_probes},
               {"monotonicity_samples", a.monotonicity_samples},
               {"gap_probes", a.gap_probes},
               {"seed", a.audit_seed}};
    if (!a.compare.empty()) audit["compare"] = a.compare;
    j["audit"] = audit;
  }
  if (mode == "identities" && !a.compare.empty()) j["identities"] = json{{"compare", a.compare}};
  return j;
}

int run_mode(const std::string& mode, const CliArgs& a) {
  const std::string config = build_run_config(mode, a).dump();
  std::string summary(1u << 22, '\0');
  size_t needed = 0;
  int run_exit = 1;
  const fbdsde_status st =
      fbdsde_run_json(config.c_str(), summary.data(), summary.size(), &needed, &run_exit);
  if (st != FBDSDE_OK) {
    std::fprintf(stderr, "error: %s\n", fbdsde_last_error());
    switch (st) {
      case FBDSDE_ERR_INVALID_ARGUMENT:
      case FBDSDE_ERR_VALIDATION:
      case FBDSDE_ERR_PARSE:
      case FBDSDE_ERR_IO:
        return 3;
      default:
        return 1;
    }
  }
  summary.resize(needed > 0 ? needed - 1 : 0);
  std::fputs(summary.c_str(), stdout);
  if (!summary.empty() && summary.back() != '\n') std::fputc('\n', stdout);
  if (needed > (1u << 22))
    std::fprintf(stderr, "note: summary truncated, full report is in %s\n", a.out_dir.c_str());
  return run_exit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled forward-backward jump-diffusion solver and control certifier"};
  app.set_version_flag("--version", fbdsde_version());
  app.require_subcommand(1);

  CliArgs a;
  struct ModeDesc {
    const char* name;
    const char* help;
  };
  const ModeDesc modes[] = {
      {"solve", "Simulate the coupled system under a fixed control"},
      {"adjoint", "Solve the system and its adjoint pair"},
      {"audit", "Certify a candidate control via the sufficiency conditions"},
      {"optimize", "Run projected gradient ascent on the Hamiltonian"},
      {"identities", "Check the discrete product rule and duality identities"},
      {"verify-example", "Run the closed-form benchmark and compare against its exact solution"},
  };
  for (const auto& m : modes) {
    CLI::App* cmd = app.add_subcommand(m.name, m.help);
    add_common_options(cmd, a);
    if (std::string(m.name) == "optimize") {
      cmd->add_option("--start", a.start, "Initial constant control for the ascent");
      cmd->add_option("--opt-max-iter", a.opt_max_iter, "Ascent iteration cap")
          ->capture_default_str();
      cmd->add_option("--step0", a.step0, "Initial step size")->capture_default_str();
      cmd->add_option("--step-cap", a.step_cap, "Maximum step size")->capture_default_str();
      cmd->add_option("--min-step", a.min_step, "Smallest backtracking step")
          ->capture_default_str();
      cmd->add_option("--grad-tol", a.grad_tol, "Projected gradient stopping tolerance")
          ->capture_default_str();
    }
    if (std::string(m.name) == "audit") {
      cmd->add_option("--grid-points", a.grid_points, "Control grid points per scan")
          ->capture_default_str();
      cmd->add_option("--path-stride", a.path_stride, "Path subsampling stride for the scan")
          ->capture_default_str();
      cmd->add_option("--max-condition-tol", a.max_condition_tol,
                      "Tolerance for the pointwise maximum condition")
          ->capture_default_str();
      cmd->add_option("--probes", a.shape_probes, "Random probes for the shape checks")
          ->capture_default_str();
      cmd->add_option("--mono-samples", a.monotonicity_samples,
                      "Samples for the monotonicity audit")
          ->capture_default_str();
      cmd->add_option("--gap-probes", a.gap_probes, "Cost gap probe count")
          ->capture_default_str();
      cmd->add_option("--audit-seed", a.audit_seed, "Seed for the audit probes")
          ->capture_default_str();
      add_compare_option(cmd, a);
    }
    if (std::string(m.name) == "identities") add_compare_option(cmd, a);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& m : modes)
    if (app.get_subcommand(m.name)->parsed()) return run_mode(m.name, a);
  return 2;
}
