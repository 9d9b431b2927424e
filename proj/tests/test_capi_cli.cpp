// The C interface end to end, plus the command line front end as a
// subprocess (its path is injected by the build as FBDSDE_CLI_PATH).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fbdsde/fbdsde.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string(FBDSDE_CLI_PATH) + " " + args + " > " + stdout_file + " 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  return dir;
}

// Everything but the manifest, keyed by file name.
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

TEST_CASE("version and initial error state") {
  REQUIRE(fbdsde_version() != nullptr);
  CHECK(std::string(fbdsde_version()).find('.') != std::string::npos);
  REQUIRE(fbdsde_last_error() != nullptr);
}

TEST_CASE("problem handles: construction, dims, x0, and error codes") {
  fbdsde_problem* prob = nullptr;
  REQUIRE(fbdsde_problem_from_catalog("example31", &prob) == FBDSDE_OK);
  REQUIRE(prob != nullptr);

  int n = 0, m = 0, l = 0, d = 0, r = 0, marks = 0;
  CHECK(fbdsde_problem_dims(prob, &n, &m, &l, &d, &r, &marks) == FBDSDE_OK);
  CHECK(n == 1);
  CHECK(m == 1);
  CHECK(l == 1);
  CHECK(d == 1);
  CHECK(r == 1);
  CHECK(marks == 8);

  const double x0 = 2.0;
  CHECK(fbdsde_problem_set_x0(prob, &x0, 1) == FBDSDE_OK);
  CHECK(fbdsde_problem_set_x0(prob, &x0, 3) == FBDSDE_ERR_VALIDATION);
  fbdsde_problem_free(prob);

  fbdsde_problem* bad = nullptr;
  CHECK(fbdsde_problem_from_catalog("no-such-problem", &bad) == FBDSDE_ERR_VALIDATION);
  CHECK(bad == nullptr);
  CHECK(std::string(fbdsde_last_error()).find("no-such-problem") != std::string::npos);

  CHECK(fbdsde_problem_from_json("{ not json", &bad) == FBDSDE_ERR_PARSE);
  CHECK(fbdsde_problem_from_file("/nonexistent/config.json", &bad) == FBDSDE_ERR_IO);
  CHECK(fbdsde_problem_from_catalog(nullptr, &bad) == FBDSDE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("solve, adjoint and cost through the C interface") {
  fbdsde_problem* prob = nullptr;
  REQUIRE(fbdsde_problem_from_catalog("example31", &prob) == FBDSDE_OK);

  fbdsde_noise* noise = nullptr;
  REQUIRE(fbdsde_noise_sample(prob, 12, 300, 7, &noise) == FBDSDE_OK);

  fbdsde_control* u = nullptr;
  const double zero = 0.0;
  REQUIRE(fbdsde_control_constant(prob, 12, &zero, 1, &u) == FBDSDE_OK);

  fbdsde_solution* sol = nullptr;
  REQUIRE(fbdsde_solve(prob, u, noise, 0.5, 1e-4, 50, &sol) == FBDSDE_OK);
  int converged = 0, iterations = 0;
  CHECK(fbdsde_solution_status(sol, &converged, &iterations) == FBDSDE_OK);
  CHECK(converged == 1);
  CHECK(iterations >= 1);

  double y = 0.0, Y = 0.0, z = 0.0, Z = 0.0, k[8];
  CHECK(fbdsde_solution_values(sol, 12, 0, &y, &Y, &z, &Z, k) == FBDSDE_OK);
  CHECK(std::abs(y - 1.0) < 0.25);
  CHECK(std::abs(Y - 1.0) < 0.25);
  CHECK(fbdsde_solution_values(sol, 13, 0, &y, nullptr, nullptr, nullptr, nullptr) ==
        FBDSDE_ERR_INVALID_ARGUMENT);
  CHECK(fbdsde_solution_values(sol, 0, 300, &y, nullptr, nullptr, nullptr, nullptr) ==
        FBDSDE_ERR_INVALID_ARGUMENT);

  fbdsde_adjoint* adj = nullptr;
  REQUIRE(fbdsde_solve_adjoint(prob, u, noise, sol, 0.5, 1e-4, 50, &adj) == FBDSDE_OK);
  CHECK(fbdsde_adjoint_status(adj, &converged, &iterations) == FBDSDE_OK);
  CHECK(converged == 1);
  double p = 0.0, P = 0.0;
  CHECK(fbdsde_adjoint_values(adj, 0, 0, &p, &P, nullptr, nullptr, nullptr) == FBDSDE_OK);
  CHECK(std::abs(p + 1.0) < 0.25);  // p(0) = -x
  CHECK(std::abs(P - 4.0) < 0.35);  // P(0) = 4x

  double value = 0.0, se = 0.0;
  CHECK(fbdsde_estimate_cost(prob, u, noise, 0.5, 1e-4, 50, &value, &se) == FBDSDE_OK);
  CHECK(std::abs(value - 2.0) < 0.3);
  CHECK(se > 0.0);

  fbdsde_adjoint_free(adj);
  fbdsde_solution_free(sol);
  fbdsde_control_free(u);
  fbdsde_noise_free(noise);
  fbdsde_problem_free(prob);
}

TEST_CASE("run_json executes a run and reports the needed buffer size") {
  const fs::path dir = fresh_dir("fbdsde_capi_run");
  const std::string config = std::string("{\"mode\":\"solve\",\"problem\":{\"catalog\":") +
                             "\"decoupled-constant\"},\"steps\":5,\"paths\":30,\"seed\":1," +
                             "\"out_dir\":\"" + dir.string() + "\"}";

  char summary[65536];
  size_t needed = 0;
  int run_exit = -1;
  REQUIRE(fbdsde_run_json(config.c_str(), summary, sizeof(summary), &needed, &run_exit) ==
          FBDSDE_OK);
  CHECK(run_exit == 0);
  CHECK(needed > 1);
  CHECK(needed <= sizeof(summary));
  const json parsed = json::parse(std::string(summary));
  CHECK(parsed.at("mode") == "solve");
  CHECK(fs::exists(dir / "solve_report.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  // A short buffer truncates but still reports the full size.
  char tiny[8];
  size_t needed2 = 0;
  REQUIRE(fbdsde_run_json(config.c_str(), tiny, sizeof(tiny), &needed2, &run_exit) == FBDSDE_OK);
  CHECK(needed2 == needed);
  CHECK(std::string(tiny) == std::string(summary).substr(0, 7));

  CHECK(fbdsde_run_json(nullptr, summary, sizeof(summary), &needed, &run_exit) ==
        FBDSDE_ERR_INVALID_ARGUMENT);
  CHECK(fbdsde_run_json("{\"mode\":\"nope\",\"problem\":{\"catalog\":\"example31\"}}", summary,
                        sizeof(summary), &needed, &run_exit) == FBDSDE_ERR_PARSE);
  fs::remove_all(dir);
}

TEST_CASE("cli usage and validation exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("solve --help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("solve --no-such-flag") == 2);
  CHECK(run_cli("solve --catalog no-such-problem --steps 4 --paths 10") == 3);
}

TEST_CASE("cli solve writes artifacts and prints the summary") {
  const fs::path dir = fresh_dir("fbdsde_cli_solve");
  const fs::path cap = fs::temp_directory_path() / "fbdsde_cli_solve_stdout.json";
  const int code = run_cli(
      "solve --catalog example31 --steps 8 --paths 100 --seed 3 --out " + dir.string(),
      cap.string());
  CHECK(code == 0);

  const json summary = json::parse(slurp(cap));
  CHECK(summary.at("mode") == "solve");
  CHECK(summary.at("solve").at("converged") == true);
  CHECK(fs::exists(dir / "solve_report.json"));
  CHECK(fs::exists(dir / "state_summary.csv"));
  CHECK(fs::exists(dir / "state_sample.csv"));
  CHECK(fs::exists(dir / "control.csv"));
  CHECK(fs::exists(dir / "resolved_config.json"));
  CHECK(json::parse(slurp(dir / "solve_report.json")) == summary);
  fs::remove_all(dir);
  fs::remove(cap);
}

TEST_CASE("cli verify-example is byte-deterministic for a fixed seed") {
  const fs::path a = fresh_dir("fbdsde_cli_det_a");
  const fs::path b = fresh_dir("fbdsde_cli_det_b");
  const std::string common = "verify-example --steps 10 --paths 80 --seed 5 --out ";
  const int ca = run_cli(common + a.string());
  const int cb = run_cli(common + b.string());
  CHECK(ca == cb);  // low resolution may fail checks, but identically so

  const auto fa = artifact_bytes(a);
  const auto fb = artifact_bytes(b);
  REQUIRE(fa.size() == fb.size());
  REQUIRE(fa.size() >= 6);
  for (const auto& [name, bytes] : fa) {
    CAPTURE(name);
    REQUIRE(fb.count(name) == 1);
    CHECK(bytes == fb.at(name));
  }
  const json ma = json::parse(slurp(a / "manifest.json"));
  const json mb = json::parse(slurp(b / "manifest.json"));
  CHECK(ma.at("files") == mb.at("files"));
  fs::remove_all(a);
  fs::remove_all(b);
}
