/*
 * C interface to the twincg library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns a tcg_status; on failure tcg_last_error() holds a
 * message for the calling thread until its next failing call.
 */
#ifndef TWINCG_TWINCG_H
#define TWINCG_TWINCG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TWINCG_BUILDING_LIBRARY)
#    define TWINCG_API __declspec(dllexport)
#  else
#    define TWINCG_API __declspec(dllimport)
#  endif
#else
#  define TWINCG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tcg_status {
    TCG_OK = 0,
    TCG_ERR_INVALID_ARGUMENT = 1,
    TCG_ERR_DIMENSION = 2,
    TCG_ERR_PARSE = 3,
    TCG_ERR_IO = 4,
    TCG_ERR_USAGE = 5,
    TCG_HELP_REQUESTED = 6, /* tcg_last_error() holds the help text */
    TCG_ERR_RUNTIME = 7
} tcg_status;

typedef enum tcg_variant {
    TCG_VARIANT_STANDARD = 0,
    TCG_VARIANT_ONLINE_ABFT = 1,
    TCG_VARIANT_TWINCG = 2,
    TCG_VARIANT_TMR = 3
} tcg_variant;

typedef enum tcg_precond { TCG_PRECOND_NONE = 0, TCG_PRECOND_JACOBI = 1 } tcg_precond;

typedef enum tcg_mode { TCG_MODE_CONCURRENT = 0, TCG_MODE_SIMULATED = 1 } tcg_mode;

typedef struct tcg_matrix tcg_matrix;
typedef struct tcg_experiment tcg_experiment;
typedef struct tcg_results tcg_results;

typedef struct tcg_config {
    size_t d;
    size_t checkpoint_interval;
    double eps1;
    double eps2;
    double tol;
    size_t max_iter;
} tcg_config;

typedef struct tcg_fault_model {
    double lambda;
    int bit_lo;
    int bit_hi;
    uint64_t seed;
} tcg_fault_model;

typedef struct tcg_run_report {
    tcg_variant variant;
    size_t iterations;
    size_t fr_count;
    size_t rr_count;
    int converged;
    int aborted;
    double final_rel_residual;
    double final_abs_residual;
    size_t windows;
    size_t d1_failures;
    size_t d2_evaluations;
    size_t injected_faults;
    double wait_seconds;
} tcg_run_report;

typedef struct tcg_aggregate {
    tcg_variant variant;
    size_t runs;
    double mean_fr;
    double mean_rr;
    double mean_iterations;
    double abort_fraction;
} tcg_aggregate;

typedef struct tcg_probe_report {
    double lambda;
    size_t d;
    size_t samples;
    double analytic[3];  /* clean, exactly one faulty, both faulty */
    double empirical[3];
    double std_error[3];
} tcg_probe_report;

TWINCG_API const char* tcg_version(void);
TWINCG_API const char* tcg_last_error(void);
TWINCG_API const char* tcg_variant_name(tcg_variant v);

/* Matrices */
TWINCG_API tcg_status tcg_matrix_load(const char* path, tcg_matrix** out);
/* "poisson2d:K", "poisson3d:K" or a Matrix Market path. */
TWINCG_API tcg_status tcg_matrix_from_source(const char* source, tcg_matrix** out);
TWINCG_API tcg_status tcg_matrix_save(const tcg_matrix* m, const char* path);
TWINCG_API void tcg_matrix_free(tcg_matrix* m);
TWINCG_API size_t tcg_matrix_dim(const tcg_matrix* m);
TWINCG_API size_t tcg_matrix_nnz(const tcg_matrix* m);
TWINCG_API double tcg_matrix_norm(const tcg_matrix* m);
TWINCG_API tcg_status tcg_spmv(const tcg_matrix* m, const double* x, size_t n, double* y);

/* Single runs */
TWINCG_API void tcg_config_default(tcg_config* cfg);
/* b may be NULL, meaning b = A * ones. x_out may be NULL. */
TWINCG_API tcg_status tcg_run(const tcg_matrix* m, const double* b, size_t n, tcg_variant variant,
                              tcg_precond precond, const tcg_config* cfg,
                              const tcg_fault_model* faults, tcg_mode mode,
                              tcg_run_report* report, double* x_out);

/* Closed-form window probabilities */
TWINCG_API double tcg_p_fault_iter(double lambda, size_t replicas);
TWINCG_API double tcg_p_clean_window(double lambda, size_t d, size_t replicas);
TWINCG_API double tcg_p_exactly_one_faulty(double lambda, size_t d);
TWINCG_API double tcg_p_both_faulty(double lambda, size_t d);

TWINCG_API tcg_status tcg_probe(double lambda, size_t d, size_t samples, uint64_t seed,
                                tcg_probe_report* out);
/* Parses "probe" flags, runs, and renders the report; *text_out stays valid
 * until the next call on this thread. */
TWINCG_API tcg_status tcg_probe_command(int argc, const char* const* argv, const char** text_out);

/* Experiments */
TWINCG_API tcg_status tcg_experiment_parse(int argc, const char* const* argv,
                                           tcg_experiment** out);
TWINCG_API void tcg_experiment_free(tcg_experiment* e);
/* CSV destination given by --out, or NULL when the CSV should go to stdout. */
TWINCG_API const char* tcg_experiment_output_path(const tcg_experiment* e);
TWINCG_API tcg_status tcg_experiment_run(const tcg_experiment* e, tcg_results** out);

TWINCG_API void tcg_results_free(tcg_results* r);
TWINCG_API const char* tcg_results_csv(const tcg_results* r);
TWINCG_API const char* tcg_results_table(const tcg_results* r);
TWINCG_API size_t tcg_results_variant_count(const tcg_results* r);
TWINCG_API tcg_status tcg_results_aggregate(const tcg_results* r, size_t index, tcg_aggregate* out);
/* Runs that raised instead of finishing; recorded as aborted rows. */
TWINCG_API size_t tcg_results_failure_count(const tcg_results* r);
TWINCG_API const char* tcg_results_failure(const tcg_results* r, size_t index);
/* Writes the CSV to path. */
TWINCG_API tcg_status tcg_results_write_csv(const tcg_results* r, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* TWINCG_TWINCG_H */
