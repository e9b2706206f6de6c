#ifndef RFIS_H
#define RFIS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RFIS_BUILDING)
#define RFIS_API __declspec(dllexport)
#else
#define RFIS_API __declspec(dllimport)
#endif
#else
#define RFIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rfis_status {
  RFIS_OK = 0,
  RFIS_E_INVALID_ARGUMENT = 1,
  RFIS_E_INVALID_DIMENSION = 2,
  RFIS_E_EMPTY_INPUT = 3,
  RFIS_E_DEGENERATE_WEIGHTS = 4,
  RFIS_E_OVERFLOW = 5,
  RFIS_E_DEGENERATE_Q = 6,
  RFIS_E_ENVELOPE = 7,
  RFIS_E_OUTSIDE_SUPPORT = 8,
  RFIS_E_GRID_TOO_LARGE = 9,
  RFIS_E_CONFIG = 10,
  RFIS_E_IO = 11,
  RFIS_E_NULL_ARGUMENT = 12,
  RFIS_E_INTERNAL = 13
} rfis_status;

typedef struct rfis_config rfis_config;
typedef struct rfis_report rfis_report;
typedef struct rfis_rng rfis_rng;
typedef struct rfis_dataset rfis_dataset;
typedef struct rfis_representation rfis_representation;
typedef struct rfis_sampler rfis_sampler;
typedef struct rfis_summary rfis_summary;

/* Errors. The message is per thread and stays valid until the next failing call. */
RFIS_API const char* rfis_last_error(void);
RFIS_API const char* rfis_status_name(rfis_status status);
/* Nonzero for overflow, degenerate-q, envelope and outside-support failures. */
RFIS_API int rfis_status_is_numerical(rfis_status status);
RFIS_API const char* rfis_version(void);

/* Configuration: flat key = value text with documented defaults. */
RFIS_API rfis_status rfis_config_new(rfis_config** out);
RFIS_API void rfis_config_free(rfis_config* config);
RFIS_API rfis_status rfis_config_merge_file(rfis_config* config, const char* path);
RFIS_API rfis_status rfis_config_merge_text(rfis_config* config, const char* text, const char* origin);
RFIS_API rfis_status rfis_config_set(rfis_config* config, const char* key, const char* value);
/* "key=value". */
RFIS_API rfis_status rfis_config_apply(rfis_config* config, const char* assignment);
/* *value stays valid until the config is modified or freed. */
RFIS_API rfis_status rfis_config_get(const rfis_config* config, const char* key, const char** value);

/* Commands: gen-data, check-rep, variance-report, compare-reps, sweep. */
RFIS_API rfis_status rfis_run(const rfis_config* config, const char* command, rfis_report** out);
RFIS_API void rfis_report_free(rfis_report* report);
/* JSON for reports, CSV for gen-data and sweep. */
RFIS_API const char* rfis_report_text(const rfis_report* report);
RFIS_API int rfis_report_passed(const rfis_report* report);

/* Random streams. */
RFIS_API rfis_status rfis_rng_new(uint64_t seed, rfis_rng** out);
RFIS_API rfis_status rfis_rng_substream(const rfis_rng* parent, const char* label, rfis_rng** out);
RFIS_API void rfis_rng_free(rfis_rng* rng);
RFIS_API rfis_status rfis_rng_uniform(rfis_rng* rng, double* out);
RFIS_API rfis_status rfis_rng_normal(rfis_rng* rng, double* out);

/* Datasets, row-major. */
RFIS_API rfis_status rfis_dataset_new(size_t n, size_t dim, const double* values, rfis_dataset** out);
RFIS_API rfis_status rfis_dataset_read_csv(const char* path, rfis_dataset** out);
RFIS_API rfis_status rfis_dataset_write_csv(const rfis_dataset* data, const char* path);
RFIS_API void rfis_dataset_free(rfis_dataset* data);
RFIS_API size_t rfis_dataset_size(const rfis_dataset* data);
RFIS_API size_t rfis_dataset_dim(const rfis_dataset* data);
RFIS_API rfis_status rfis_dataset_point(const rfis_dataset* data, size_t index, double* out);

/* Kernels: kernel is "gaussian" or "exponential". */
RFIS_API rfis_status rfis_kernel_eval(const char* kernel, double scale, const double* x1, const double* x2, size_t dim,
                                      double* out);

/* Feature representations: feature is "trig" or "positive_exp". */
RFIS_API rfis_status rfis_representation_new(const char* feature, const char* kernel, double scale, size_t dim,
                                             rfis_representation** out);
RFIS_API void rfis_representation_free(rfis_representation* rep);
RFIS_API size_t rfis_representation_omega_dim(const rfis_representation* rep);
RFIS_API rfis_status rfis_phi(const rfis_representation* rep, const double* x, const double* omega, double* out);

/* Samplers: strategy is "naive", "pool_resampler", "rejection" or "grid_oracle".
   d2 may be NULL, meaning both marginals are d1. */
RFIS_API rfis_status rfis_sampler_new(const rfis_representation* rep, const rfis_dataset* d1, const rfis_dataset* d2,
                                      const char* strategy, size_t pool_size, rfis_rng* rng, rfis_sampler** out);
RFIS_API void rfis_sampler_free(rfis_sampler* sampler);
RFIS_API rfis_status rfis_sampler_z_hat(const rfis_sampler* sampler, double* value, double* se);
/* omega_out holds omega_dim values. */
RFIS_API rfis_status rfis_sampler_draw(const rfis_sampler* sampler, rfis_rng* rng, double* omega_out, double* weight);

RFIS_API rfis_status rfis_kernel_estimate(const rfis_sampler* sampler, const double* x1, const double* x2, size_t k,
                                          rfis_rng* rng, double* mean, double* se);

/* Precomputed kernel-estimator summaries. */
RFIS_API rfis_status rfis_summary_build(const rfis_sampler* sampler, size_t k, const rfis_dataset* data,
                                        const double* labels, rfis_rng* rng, rfis_summary** out);
RFIS_API void rfis_summary_free(rfis_summary* summary);
RFIS_API rfis_status rfis_summary_query(const rfis_summary* summary, const double* x, double* out);
RFIS_API rfis_status rfis_naive_ke(const char* kernel, double scale, const rfis_dataset* data, const double* labels,
                                   const double* x, double* out);

/* Variance analysis. */
RFIS_API rfis_status rfis_empirical_variance(const rfis_sampler* sampler, const rfis_dataset* d1,
                                             const rfis_dataset* d2, size_t n_pairs, size_t n_omega,
                                             const rfis_rng* rng, double* value, double* se);
RFIS_API rfis_status rfis_theoretical_variance(const rfis_sampler* sampler, const rfis_rng* rng, double* value,
                                               double* se);
RFIS_API rfis_status rfis_cs_bound(const char* kernel, double scale, const rfis_dataset* d1, const rfis_dataset* d2,
                                   const rfis_rng* rng, double* value, double* se);

#ifdef __cplusplus
}
#endif

#endif
