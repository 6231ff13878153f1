/* Hyperspectral bundle-unmixing toolkit, C interface.
 *
 * All functions return unmix_status; UNMIX_OK is 0. On failure a
 * thread-local message is available through unmix_last_error(). Objects are
 * opaque handles created and destroyed by this library; passing NULL where
 * an object is required yields UNMIX_ERR_INVALID_ARGUMENT.
 */
#ifndef UNMIX_H
#define UNMIX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum unmix_status {
  UNMIX_OK = 0,
  UNMIX_ERR_INVALID_ARGUMENT = 1, /* bad parameter or misuse */
  UNMIX_ERR_DIMENSION = 2,        /* shape mismatch */
  UNMIX_ERR_DATA = 3,             /* file missing or malformed */
  UNMIX_ERR_SOLVER = 4,           /* numerical failure */
  UNMIX_ERR_BUDGET = 5,           /* enumeration larger than the budget */
  UNMIX_ERR_BUFFER = 6,           /* caller buffer too small */
  UNMIX_ERR_INTERNAL = 7          /* unexpected failure */
} unmix_status;

typedef enum unmix_method {
  UNMIX_METHOD_FCLS = 0,
  UNMIX_METHOD_SUNSAL = 1,
  UNMIX_METHOD_GROUP = 2,   /* group lasso */
  UNMIX_METHOD_ELITIST = 3, /* elitist lasso */
  UNMIX_METHOD_MEMM = 4,
  UNMIX_METHOD_MEMM_S = 5,  /* one atom per class */
  UNMIX_METHOD_MESMA = 6    /* exhaustive subset search */
} unmix_method;

typedef struct unmix_bundles unmix_bundles; /* endmember dictionary */
typedef struct unmix_batch unmix_batch;     /* pixels plus optional truth */
typedef struct unmix_result unmix_result;   /* per-pixel solutions */

const char* unmix_version(void);
const char* unmix_status_name(unmix_status s);
/* Message from the most recent failing call on this thread. */
const char* unmix_last_error(void);

/* ---- dictionary ------------------------------------------------------- */

unmix_status unmix_bundles_load_csv(const char* path, unmix_bundles** out);
unmix_status unmix_bundles_save_csv(const unmix_bundles* b, const char* path);
void unmix_bundles_free(unmix_bundles* b);
int32_t unmix_bundles_bands(const unmix_bundles* b);
int32_t unmix_bundles_classes(const unmix_bundles* b);
int32_t unmix_bundles_atoms(const unmix_bundles* b);
int32_t unmix_bundles_class_size(const unmix_bundles* b, int32_t class_index);
/* Pointer valid until the bundles object is freed. */
const char* unmix_bundles_class_name(const unmix_bundles* b,
                                     int32_t class_index);

/* ---- pixel batches ---------------------------------------------------- */

/* truth_csv may be NULL; then the batch carries no ground truth. */
unmix_status unmix_batch_load_csv(const char* pixels_csv,
                                  const char* truth_csv, unmix_batch** out);
unmix_status unmix_batch_save_csv(const unmix_batch* b,
                                  const char* pixels_csv,
                                  const char* truth_csv);
void unmix_batch_free(unmix_batch* b);
int32_t unmix_batch_pixels(const unmix_batch* b);
int32_t unmix_batch_bands(const unmix_batch* b);
int unmix_batch_has_truth(const unmix_batch* b);
double unmix_batch_snr_db(const unmix_batch* b);
/* "sim1", "sim2", or "file"; valid until the batch is freed. */
const char* unmix_batch_dataset(const unmix_batch* b);
uint64_t unmix_batch_seed(const unmix_batch* b);

/* ---- simulation ------------------------------------------------------- */

typedef struct unmix_sim_config {
  uint64_t seed;
  int32_t scenario;        /* 1: one atom per class; 2: per-class mixtures */
  int32_t classes;         /* K */
  int32_t atoms_per_class; /* per-class dictionary size */
  int32_t pixels;
  int32_t bands;
  double snr_db;           /* INFINITY for noiseless */
  int32_t max_active_classes;
  int32_t max_active_atoms;
  double dirichlet_alpha;
} unmix_sim_config;

/* Fills the defaults: seed 1, scenario 2, 10 classes x 30 atoms,
 * 100 pixels, 224 bands, noiseless, 5 active classes/atoms, alpha 1. */
void unmix_sim_config_init(unmix_sim_config* cfg);

/* Seed-deterministic: equal configs produce identical data. */
unmix_status unmix_simulate(const unmix_sim_config* cfg,
                            unmix_bundles** bundles_out,
                            unmix_batch** batch_out);

/* ---- solving ---------------------------------------------------------- */

typedef struct unmix_solve_options {
  unmix_method method;
  double lambda_a;  /* abundance sparsity (memm, memm_s) */
  double lambda_b;  /* bundling sparsity (memm) */
  double lambda_r;  /* l1 weight (sunsal, group) / social weight (elitist) */
  double lambda_g;  /* group weight (group) */
  double gamma_m;   /* step inflation, bundling block */
  double gamma_a;   /* step inflation, abundance block */
  int32_t max_iters;
  double rel_tol;
  double admm_rho;
  int32_t admm_max_iters;
  double admm_tol;
  int32_t elitist_p; /* (1,2) or (2,1) */
  int32_t elitist_q;
  int32_t mesma_max_classes;
  int64_t mesma_budget;   /* candidate combinations per pixel */
  int32_t bundling_cap;   /* optional hard caps, 0 = none */
  int32_t class_cap;
  int32_t threads;        /* 0: UNMIX_THREADS env var, then hardware */
} unmix_solve_options;

void unmix_solve_options_init(unmix_solve_options* opt, unmix_method method);

/* Per-pixel failures are collected, the batch proceeds; the call fails with
 * UNMIX_ERR_SOLVER only when every pixel failed. */
unmix_status unmix_solve(const unmix_bundles* bundles,
                         const unmix_batch* batch,
                         const unmix_solve_options* opt, unmix_result** out);
void unmix_result_free(unmix_result* r);

int32_t unmix_result_pixels(const unmix_result* r);
int32_t unmix_result_classes(const unmix_result* r);
int32_t unmix_result_atoms(const unmix_result* r);
int32_t unmix_result_failed(const unmix_result* r);
/* 1 when the pixel solved; message for a failed pixel via
 * unmix_result_pixel_error. */
int unmix_result_pixel_ok(const unmix_result* r, int32_t pixel);
const char* unmix_result_pixel_error(const unmix_result* r, int32_t pixel);
double unmix_result_wall_time_s(const unmix_result* r);
int unmix_result_has_bundling(const unmix_result* r);
/* Solver name ("fcls", "memm", ...); valid until the result is freed. */
const char* unmix_result_method(const unmix_result* r);

/* Column-major copies; cap is the element capacity of the buffer
 * (classes*pixels or atoms*pixels). */
unmix_status unmix_result_abundances(const unmix_result* r, double* out,
                                     size_t cap);
unmix_status unmix_result_multiple(const unmix_result* r, double* out,
                                   size_t cap);
unmix_status unmix_result_bundling(const unmix_result* r, double* out,
                                   size_t cap);

/* Writes abundances.csv and multiple_abundances.csv into dir, plus
 * bundling.csv and objective_trace.csv when the method produces them. */
unmix_status unmix_result_save_csv(const unmix_result* r, const char* dir);
unmix_status unmix_result_load_csv(const char* abundances_csv,
                                   const char* multiple_csv,
                                   unmix_result** out);

/* ---- evaluation ------------------------------------------------------- */

typedef struct unmix_eval_report {
  double sre_a_db;   /* abundance reconstruction error ratio, dB */
  double sre_r_db;   /* per-atom variant */
  double sl_a;       /* mean active entries per pixel (threshold 1e-4) */
  double sl_r;
  double sl_a_ref;   /* the same levels measured on the truth */
  double sl_r_ref;
  double dist_a;     /* mean support distance */
  double dist_r;
  double wall_time_s;
  int32_t sre_a_capped; /* ratio hit the 300 dB cap */
  int32_t sre_r_capped;
  int32_t has_truth;    /* 0: only sl_a/sl_r are meaningful */
} unmix_eval_report;

unmix_status unmix_evaluate(const unmix_batch* batch, const unmix_result* r,
                            unmix_eval_report* out);
/* Per-pixel breakdown table next to the aggregate report. */
unmix_status unmix_evaluate_per_pixel_csv(const unmix_batch* batch,
                                          const unmix_result* r,
                                          const char* path);

typedef struct unmix_report_labels {
  const char* method;  /* NULL: left blank */
  const char* dataset; /* NULL: left blank */
  double snr_db;       /* INFINITY for noiseless */
  double lambda_a, lambda_b, lambda_r, lambda_g; /* NAN to omit */
} unmix_report_labels;

/* CSV header / row and fixed-width console row for a report. Writes at most
 * cap bytes including the terminator; UNMIX_ERR_BUFFER when truncated. */
unmix_status unmix_report_csv_header(char* buf, size_t cap);
unmix_status unmix_report_csv_row(const unmix_report_labels* labels,
                                  const unmix_eval_report* r, char* buf,
                                  size_t cap);
unmix_status unmix_report_text_header(char* buf, size_t cap);
unmix_status unmix_report_text_row(const unmix_report_labels* labels,
                                   const unmix_eval_report* r, char* buf,
                                   size_t cap);

/* ---- abundance maps --------------------------------------------------- */

/* One 8-bit PGM per class (map_c00.pgm, map_c01.pgm, ...) into dir; value =
 * round(255 * abundance), pixels laid out row-major width x height. */
unmix_status unmix_result_write_maps(const unmix_result* r, int32_t width,
                                     int32_t height, const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* UNMIX_H */
