#include "fbdsde/fbdsde.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "core/adjoint.hpp"
#include "core/catalog.hpp"
#include "core/config.hpp"
#include "core/lq.hpp"
#include "core/noise.hpp"
#include "core/optimizer.hpp"
#include "core/pipeline.hpp"
#include "core/solver.hpp"

struct fbdsde_problem {
  fbdsde::LqProblem lq;
  fbdsde::ProblemSpec spec;
};

struct fbdsde_noise {
  fbdsde::NoiseBundle bundle;
};

struct fbdsde_control {
  fbdsde::ControlProcess process;
};

struct fbdsde_solution {
  fbdsde::StatePaths state;
  fbdsde::SolveReport report;
};

struct fbdsde_adjoint {
  fbdsde::AdjointPaths adj;
  fbdsde::SolveReport report;
};

namespace {

thread_local std::string g_last_error;

fbdsde_status fail(fbdsde_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
fbdsde_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FBDSDE_OK;
  } catch (const fbdsde::ConfigParseError& err) {
    g_last_error = err.what();
    return FBDSDE_ERR_PARSE;
  } catch (const std::invalid_argument& err) {
    g_last_error = err.what();
    return FBDSDE_ERR_VALIDATION;
  } catch (const std::filesystem::filesystem_error& err) {
    g_last_error = err.what();
    return FBDSDE_ERR_IO;
  } catch (const std::runtime_error& err) {
    g_last_error = err.what();
    return std::strncmp(err.what(), "io:", 3) == 0 ? FBDSDE_ERR_IO : FBDSDE_ERR_NUMERIC;
  } catch (const std::exception& err) {
    g_last_error = err.what();
    return FBDSDE_ERR_INTERNAL;
  }
}

fbdsde::SolveOptions make_options(double theta, double tol, int max_iter) {
  fbdsde::SolveOptions opt;
  opt.theta = theta;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return opt;
}

fbdsde_status make_problem(fbdsde::LqProblem lq, fbdsde_problem** out) {
  auto prob = std::make_unique<fbdsde_problem>(fbdsde_problem{std::move(lq), {}});
  prob->spec = fbdsde::build_lq_problem(prob->lq);
  *out = prob.release();
  return FBDSDE_OK;
}

}  // namespace

extern "C" {

const char* fbdsde_version(void) { return "0.1.0"; }

const char* fbdsde_last_error(void) { return g_last_error.c_str(); }

fbdsde_status fbdsde_problem_from_catalog(const char* name, fbdsde_problem** out) {
  if (name == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_problem_from_catalog: null argument");
  *out = nullptr;
  return guarded([&] { make_problem(fbdsde::catalog_problem(name), out); });
}

fbdsde_status fbdsde_problem_from_json(const char* json_text, fbdsde_problem** out) {
  if (json_text == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_problem_from_json: null argument");
  *out = nullptr;
  return guarded([&] { make_problem(fbdsde::parse_lq_config(json_text), out); });
}

fbdsde_status fbdsde_problem_from_file(const char* path, fbdsde_problem** out) {
  if (path == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_problem_from_file: null argument");
  *out = nullptr;
  return guarded([&] { make_problem(fbdsde::load_lq_config(path), out); });
}

fbdsde_status fbdsde_problem_set_x0(fbdsde_problem* prob, const double* x0, int n) {
  if (prob == nullptr || x0 == nullptr || n < 1)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_problem_set_x0: null or empty argument");
  return guarded([&] {
    fbdsde::Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = x0[i];
    fbdsde::LqProblem lq = prob->lq;
    lq.x0 = std::move(v);
    fbdsde::ProblemSpec spec = fbdsde::build_lq_problem(lq);  // validates the new x0
    prob->lq = std::move(lq);
    prob->spec = std::move(spec);
  });
}

fbdsde_status fbdsde_problem_dims(const fbdsde_problem* prob, int* n, int* m, int* l, int* d,
                                  int* r, int* marks) {
  if (prob == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_problem_dims: null problem");
  if (n != nullptr) *n = prob->spec.dims.n;
  if (m != nullptr) *m = prob->spec.dims.m;
  if (l != nullptr) *l = prob->spec.dims.l;
  if (d != nullptr) *d = prob->spec.dims.d;
  if (r != nullptr) *r = prob->spec.dims.r;
  if (marks != nullptr) *marks = prob->spec.marks();
  g_last_error.clear();
  return FBDSDE_OK;
}

void fbdsde_problem_free(fbdsde_problem* prob) { delete prob; }

fbdsde_status fbdsde_noise_sample(const fbdsde_problem* prob, int steps, int paths,
                                  uint64_t seed, fbdsde_noise** out) {
  if (prob == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_noise_sample: null argument");
  *out = nullptr;
  return guarded([&] {
    fbdsde::TimeGrid grid{prob->spec.T, steps};
    grid.validate();
    auto* noise = new fbdsde_noise{fbdsde::sample_noise_bundle(
        grid, paths, seed, prob->spec.dims.d, prob->spec.dims.l, prob->spec.jumps)};
    *out = noise;
  });
}

void fbdsde_noise_free(fbdsde_noise* noise) { delete noise; }

fbdsde_status fbdsde_control_constant(const fbdsde_problem* prob, int steps, const double* value,
                                      int r, fbdsde_control** out) {
  if (prob == nullptr || value == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_control_constant: null argument");
  *out = nullptr;
  return guarded([&] {
    if (steps < 1) throw std::invalid_argument("fbdsde_control_constant: steps must be positive");
    if (r != prob->spec.dims.r)
      throw std::invalid_argument("fbdsde_control_constant: value length does not match r");
    fbdsde::Vec v(r);
    for (int i = 0; i < r; ++i) v[i] = value[i];
    *out = new fbdsde_control{
        fbdsde::ControlProcess::constant(prob->spec.controls.project(v), steps + 1)};
  });
}

void fbdsde_control_free(fbdsde_control* control) { delete control; }

fbdsde_status fbdsde_solve(const fbdsde_problem* prob, const fbdsde_control* control,
                           const fbdsde_noise* noise, double theta, double tol, int max_iter,
                           fbdsde_solution** out) {
  if (prob == nullptr || control == nullptr || noise == nullptr || out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_solve: null argument");
  *out = nullptr;
  return guarded([&] {
    auto sol = std::make_unique<fbdsde_solution>();
    sol->report = fbdsde::solve_fbdsde(prob->spec, control->process, noise->bundle,
                                       make_options(theta, tol, max_iter), sol->state);
    *out = sol.release();
  });
}

fbdsde_status fbdsde_solution_status(const fbdsde_solution* sol, int* converged,
                                     int* iterations) {
  if (sol == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_solution_status: null solution");
  if (converged != nullptr) *converged = sol->report.converged ? 1 : 0;
  if (iterations != nullptr) *iterations = sol->report.iterations;
  g_last_error.clear();
  return FBDSDE_OK;
}

fbdsde_status fbdsde_solution_values(const fbdsde_solution* sol, int node, int path, double* y,
                                     double* Y, double* z, double* Z, double* k) {
  if (sol == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_solution_values: null solution");
  const fbdsde::StatePaths& s = sol->state;
  if (node < 0 || node > s.grid.steps || path < 0 || path >= s.paths)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_solution_values: index out of range");
  auto copy = [&](const fbdsde::PathArray& arr, double* dst) {
    if (dst != nullptr) std::copy_n(arr.at(node, path), arr.block(), dst);
  };
  copy(s.y, y);
  copy(s.Y, Y);
  copy(s.z, z);
  copy(s.Z, Z);
  copy(s.k, k);
  g_last_error.clear();
  return FBDSDE_OK;
}

void fbdsde_solution_free(fbdsde_solution* sol) { delete sol; }

fbdsde_status fbdsde_solve_adjoint(const fbdsde_problem* prob, const fbdsde_control* control,
                                   const fbdsde_noise* noise, const fbdsde_solution* sol,
                                   double theta, double tol, int max_iter, fbdsde_adjoint** out) {
  if (prob == nullptr || control == nullptr || noise == nullptr || sol == nullptr ||
      out == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_solve_adjoint: null argument");
  *out = nullptr;
  return guarded([&] {
    auto adj = std::make_unique<fbdsde_adjoint>();
    adj->report = fbdsde::solve_adjoint(prob->spec, control->process, noise->bundle, sol->state,
                                        make_options(theta, tol, max_iter), adj->adj);
    *out = adj.release();
  });
}

fbdsde_status fbdsde_adjoint_status(const fbdsde_adjoint* adj, int* converged, int* iterations) {
  if (adj == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_adjoint_status: null adjoint");
  if (converged != nullptr) *converged = adj->report.converged ? 1 : 0;
  if (iterations != nullptr) *iterations = adj->report.iterations;
  g_last_error.clear();
  return FBDSDE_OK;
}

fbdsde_status fbdsde_adjoint_values(const fbdsde_adjoint* adj, int node, int path, double* p,
                                    double* P, double* q, double* Q, double* V) {
  if (adj == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_adjoint_values: null adjoint");
  const fbdsde::AdjointPaths& a = adj->adj;
  if (node < 0 || node > a.grid.steps || path < 0 || path >= a.paths)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_adjoint_values: index out of range");
  auto copy = [&](const fbdsde::PathArray& arr, double* dst) {
    if (dst != nullptr) std::copy_n(arr.at(node, path), arr.block(), dst);
  };
  copy(a.p, p);
  copy(a.P, P);
  copy(a.q, q);
  copy(a.Q, Q);
  copy(a.V, V);
  g_last_error.clear();
  return FBDSDE_OK;
}

void fbdsde_adjoint_free(fbdsde_adjoint* adj) { delete adj; }

fbdsde_status fbdsde_estimate_cost(const fbdsde_problem* prob, const fbdsde_control* control,
                                   const fbdsde_noise* noise, double theta, double tol,
                                   int max_iter, double* value, double* se) {
  if (prob == nullptr || control == nullptr || noise == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_estimate_cost: null argument");
  return guarded([&] {
    fbdsde::CostEstimate est = fbdsde::estimate_cost(prob->spec, control->process, noise->bundle,
                                                     make_options(theta, tol, max_iter));
    if (value != nullptr) *value = est.value;
    if (se != nullptr) *se = est.se;
  });
}

fbdsde_status fbdsde_run_json(const char* run_config_json, char* summary, size_t cap,
                              size_t* needed, int* run_exit) {
  if (run_config_json == nullptr)
    return fail(FBDSDE_ERR_INVALID_ARGUMENT, "fbdsde_run_json: null config");
  return guarded([&] {
    fbdsde::RunResult result = fbdsde::run_pipeline(run_config_json);
    if (needed != nullptr) *needed = result.summary_json.size() + 1;
    if (summary != nullptr && cap > 0) {
      size_t count = std::min(cap - 1, result.summary_json.size());
      std::memcpy(summary, result.summary_json.data(), count);
      summary[count] = '\0';
    }
    if (run_exit != nullptr) *run_exit = result.exit_code;
  });
}

}  // extern "C"
