/*
 * sr1track C API.
 *
 * Rank-one secant tracking of convergent symmetric matrix sequences:
 * the update itself, uniform-linear-independence diagnostics, quantitative
 * error-bound monitoring, seeded benchmark tables and constrained geodesic
 * shooting with per-time inverse approximations.
 *
 * Conventions:
 *   - every fallible call returns an sr1t_status; 0 is success
 *   - on failure, sr1t_last_error() returns a thread-local message
 *   - handles are opaque and freed with their *_destroy function
 *   - matrices cross the boundary as row-major double arrays
 *   - all randomness is derived from explicit 64-bit seeds; identical
 *     configurations produce identical results, bit for bit
 */
#ifndef SR1TRACK_H
#define SR1TRACK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sr1t_status {
  SR1T_OK = 0,
  SR1T_ERR_INVALID_ARGUMENT = 1,
  SR1T_ERR_DIMENSION_MISMATCH = 2,
  SR1T_ERR_SINGULAR_MATRIX = 3,
  SR1T_ERR_NO_CONVERGENCE = 4,
  SR1T_ERR_DEGENERATE_DIRECTION = 5,
  SR1T_ERR_NOT_IN_SPAN = 6,
  SR1T_ERR_INFEASIBLE = 7,
  SR1T_ERR_IO = 8,
  SR1T_ERR_INTERNAL = 9
} sr1t_status;

typedef enum sr1t_format { SR1T_FORMAT_CSV = 0, SR1T_FORMAT_JSON = 1 } sr1t_format;

const char* sr1t_version(void);

/* Message for the most recent failing call on this thread. */
const char* sr1t_last_error(void);

/* ------------------------------------------------------------------ */
/* Rank-one secant state                                               */
/* ------------------------------------------------------------------ */

typedef struct sr1t_state sr1t_state;

/* Update classification: 0 applied, 1 skipped (low cosine), 2 no-op. */
typedef struct sr1t_update_outcome {
  int status;
  double cosine;
  double residual_norm;
} sr1t_update_outcome;

/* B starts at the identity. */
sr1t_status sr1t_state_create(int dim, sr1t_state** out);
void sr1t_state_destroy(sr1t_state* state);
int sr1t_state_dim(const sr1t_state* state);

/* One secant update with direction s and response y (length dim each).
 * Pass c_min <= 0 or r_floor < 0 to take the defaults (1e-8, 1e-13). */
sr1t_status sr1t_state_update(sr1t_state* state, const double* s, const double* y,
                              double c_min, double r_floor, sr1t_update_outcome* outcome);

/* Copies the current approximation into out (dim*dim, row-major). */
sr1t_status sr1t_state_matrix(const sr1t_state* state, double* out);

long sr1t_state_updates_applied(const sr1t_state* state);
long sr1t_state_updates_skipped(const sr1t_state* state);
double sr1t_state_min_cosine(const sr1t_state* state);

/* ------------------------------------------------------------------ */
/* Quantitative bounds and independence constants                      */
/* ------------------------------------------------------------------ */

/* 1 + ((2+c)/c)^(m+1); infinity on overflow (still a valid bound). */
sr1t_status sr1t_error_constant(double c, int m, double* out);

/* ((2+c)/c)^(l-k-1) * eta * s_norm, bounding |(A_k - B_l) s_k|. */
sr1t_status sr1t_direction_drift_bound(double c, long k, long l, double eta, double s_norm,
                                       double* out);

/* eta_star * error_constant(c,m) * coeff_abs_sum. */
sr1t_status sr1t_span_error_bound(double c, int m, double eta_star, double coeff_abs_sum,
                                  double* out);

/* error_constant(c,m) * sqrt(dim)/beta * eta_star, bounding ||B - A*||. */
sr1t_status sr1t_limit_error_bound(double c, int m, int dim, double beta, double eta_star,
                                   double* out);

/* beta^dim and alpha / dim^((dim-1)/2): the two-sided score conversion. */
sr1t_status sr1t_beta_to_alpha(double beta, int dim, double* out);
sr1t_status sr1t_alpha_to_beta(double alpha, int dim, double* out);

/* sqrt(dim)/beta: the coefficient-mass constant for beta-independent
 * windows. */
sr1t_status sr1t_gamma_bound(double beta, int dim, double* out);

/* ------------------------------------------------------------------ */
/* Reports                                                             */
/* ------------------------------------------------------------------ */

/* A finished run: rendered CSV/JSON plus named summary statistics. The
 * pointer returned by sr1t_report_render stays valid until the report is
 * destroyed. */
typedef struct sr1t_report sr1t_report;

const char* sr1t_report_render(const sr1t_report* report, sr1t_format format);
sr1t_status sr1t_report_stat(const sr1t_report* report, const char* key, double* out);
void sr1t_report_destroy(sr1t_report* report);

/* ------------------------------------------------------------------ */
/* Seeded runs                                                         */
/* ------------------------------------------------------------------ */

/* Sequence tracking against a seeded, randomly perturbed convergent
 * sequence (perturbation decays like lambda^k), cyclic directions.
 * Stats: steps, applied, skipped, noops, min_cosine, beta_hat,
 * final_dist_op, final_dist_fro, limit_checks, limit_violations,
 * drift_checks, drift_violations, bounds_in_scope, eta_tail_sound,
 * aborted. */
typedef struct sr1t_track_config {
  int dim;
  double lambda;
  int steps;
  uint64_t seed;
  double c_min;   /* <= 0 for default */
  double r_floor; /* < 0 for default */
  int window;     /* < 0 for dim */
  int check_bounds;
} sr1t_track_config;

sr1t_status sr1t_run_track(const sr1t_track_config* config, sr1t_report** out);

/* Inverse-of-the-limit tracking; random_directions selects Gaussian probe
 * vectors instead of the cyclic canonical ones. Same stats as track. */
typedef struct sr1t_invert_config {
  int dim;
  double lambda;
  int steps;
  uint64_t seed;
  int random_directions;
  double c_min;
  double r_floor;
  int window;
  int check_bounds;
} sr1t_invert_config;

sr1t_status sr1t_run_invert(const sr1t_invert_config* config, sr1t_report** out);

/* Secant oracle on the quadratic with Hessian diag(1..dim), coordinate-step
 * iterates. Same stats as track. */
typedef struct sr1t_qn_demo_config {
  int dim;
  int steps;
} sr1t_qn_demo_config;

sr1t_status sr1t_run_qn_demo(const sr1t_qn_demo_config* config, sr1t_report** out);

/* Benchmark tables over seeded trials. CSV columns:
 * param,steps,mean,max,trials. Stats: cells, trials, resamples. */
typedef struct sr1t_table_config {
  int dim;
  double lambda;  /* table 2 only; table 1 uses lambdas 0.9, 0.5, 0.1 */
  int trials;
  uint64_t seed;
  int threads; /* <= 1 runs sequentially */
} sr1t_table_config;

sr1t_status sr1t_run_table1(const sr1t_table_config* config, sr1t_report** out);
sr1t_status sr1t_run_table2(const sr1t_table_config* config, sr1t_report** out);

/* Per-window independence scores for a direction sequence: vectors holds
 * count*dim doubles, row-major. CSV columns: k,alpha,beta,gamma,exhaustive.
 * Stats: windows, beta_hat, alpha_hat. */
sr1t_status sr1t_run_uli_check(const double* vectors, int count, int dim, int window,
                               sr1t_report** out);

/* Same, reading the vectors from a CSV file (one vector per line, no
 * header). */
sr1t_status sr1t_run_uli_check_file(const char* path, int dim, int window,
                                    sr1t_report** out);

/* Constrained geodesic shooting on the built-in landmark problem; the
 * configuration is a JSON object with keys n_landmarks, sigma, constraints,
 * seed, grid, iterations, step0, mode ("sr1"|"exact"), c_min, r_floor.
 * CSV columns: iter,cost,grad_norm,max_binv_residual,step.
 * Stats: iterations, initial_cost, final_cost, final_grad_norm,
 * final_max_binv_residual, stalls. */
sr1t_status sr1t_run_geodesic(const char* config_json, sr1t_report** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SR1TRACK_H */
