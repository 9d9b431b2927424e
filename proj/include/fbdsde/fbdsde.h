#ifndef FBDSDE_H
#define FBDSDE_H

/* C interface to the coupled forward-backward jump-diffusion toolkit.
 *
 * All functions that can fail return fbdsde_status; on failure
 * fbdsde_last_error() carries a message for the calling thread. Objects
 * returned through out-parameters are owned by the caller and released
 * with the matching _free function. Passing NULL to a _free function is a
 * no-op.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fbdsde_status {
  FBDSDE_OK = 0,
  FBDSDE_ERR_INVALID_ARGUMENT = 1, /* null pointer or out-of-range index */
  FBDSDE_ERR_VALIDATION = 2,       /* structurally bad problem or options */
  FBDSDE_ERR_PARSE = 3,            /* malformed JSON input */
  FBDSDE_ERR_IO = 4,               /* file read or write failed */
  FBDSDE_ERR_NUMERIC = 5,          /* non-finite values inside a solve */
  FBDSDE_ERR_INTERNAL = 6
} fbdsde_status;

typedef struct fbdsde_problem fbdsde_problem;
typedef struct fbdsde_noise fbdsde_noise;
typedef struct fbdsde_control fbdsde_control;
typedef struct fbdsde_solution fbdsde_solution;
typedef struct fbdsde_adjoint fbdsde_adjoint;

const char* fbdsde_version(void);

/* Message from the last failing call on this thread; empty when the last
 * call succeeded. The pointer stays valid until the next call. */
const char* fbdsde_last_error(void);

/* Problems. JSON problems use the same schema as the config files; see the
 * README. */
fbdsde_status fbdsde_problem_from_catalog(const char* name, fbdsde_problem** out);
fbdsde_status fbdsde_problem_from_json(const char* json_text, fbdsde_problem** out);
fbdsde_status fbdsde_problem_from_file(const char* path, fbdsde_problem** out);
fbdsde_status fbdsde_problem_set_x0(fbdsde_problem* prob, const double* x0, int n);
fbdsde_status fbdsde_problem_dims(const fbdsde_problem* prob, int* n, int* m, int* l, int* d,
                                  int* r, int* marks);
void fbdsde_problem_free(fbdsde_problem* prob);

/* Driving noise: Brownian increments for both filtrations plus compensated
 * jump counts, sampled once and shared across solves for common random
 * numbers. */
fbdsde_status fbdsde_noise_sample(const fbdsde_problem* prob, int steps, int paths,
                                  uint64_t seed, fbdsde_noise** out);
void fbdsde_noise_free(fbdsde_noise* noise);

/* Constant open-loop control held at every grid node (steps + 1 of them),
 * projected onto the problem's control set. value has length r. */
fbdsde_status fbdsde_control_constant(const fbdsde_problem* prob, int steps, const double* value,
                                      int r, fbdsde_control** out);
void fbdsde_control_free(fbdsde_control* control);

/* Coupled solve of the forward-backward pair on the given noise. */
fbdsde_status fbdsde_solve(const fbdsde_problem* prob, const fbdsde_control* control,
                           const fbdsde_noise* noise, double theta, double tol, int max_iter,
                           fbdsde_solution** out);
fbdsde_status fbdsde_solution_status(const fbdsde_solution* sol, int* converged,
                                     int* iterations);
/* Copies the quintuple at (node, path). Any output pointer may be NULL.
 * Buffer lengths: y n, Y m, z n*l, Z m*d, k m*marks, all column-major. */
fbdsde_status fbdsde_solution_values(const fbdsde_solution* sol, int node, int path, double* y,
                                     double* Y, double* z, double* Z, double* k);
void fbdsde_solution_free(fbdsde_solution* sol);

/* Adjoint pair along a solved trajectory. */
fbdsde_status fbdsde_solve_adjoint(const fbdsde_problem* prob, const fbdsde_control* control,
                                   const fbdsde_noise* noise, const fbdsde_solution* sol,
                                   double theta, double tol, int max_iter, fbdsde_adjoint** out);
fbdsde_status fbdsde_adjoint_status(const fbdsde_adjoint* adj, int* converged, int* iterations);
/* Buffer lengths: p m, P n, q m*l, Q n*d, V n*marks. */
fbdsde_status fbdsde_adjoint_values(const fbdsde_adjoint* adj, int node, int path, double* p,
                                    double* P, double* q, double* Q, double* V);
void fbdsde_adjoint_free(fbdsde_adjoint* adj);

/* Monte Carlo cost of a control: solve on the noise, then quadrature. */
fbdsde_status fbdsde_estimate_cost(const fbdsde_problem* prob, const fbdsde_control* control,
                                   const fbdsde_noise* noise, double theta, double tol,
                                   int max_iter, double* value, double* se);

/* Runs one pipeline described by a run-config JSON document (see the
 * README): solves, audits, optimizes or verifies, and writes artifacts plus
 * a hash manifest to the configured directory. The summary JSON is copied
 * into `summary` (truncated if cap is too small); *needed receives the
 * required size including the terminator and may be checked by the caller.
 * *run_exit is 0 for a clean run and 1 when the run's embedded checks
 * failed. summary, needed and run_exit may each be NULL. */
fbdsde_status fbdsde_run_json(const char* run_config_json, char* summary, size_t cap,
                              size_t* needed, int* run_exit);

#ifdef __cplusplus
}
#endif

#endif /* FBDSDE_H */
