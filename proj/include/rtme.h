/* rtme — transition-matrix estimation for Markov chains observed at random
 * times. C API over the C++ core: flat row-major arrays for matrix
 * functions, an opaque accumulator handle for streaming estimation, and
 * command-level entry points used by the CLI.
 *
 * All functions return rtme_status; on failure rtme_last_error() carries a
 * thread-local message that stays valid until the next failing call on the
 * same thread.
 */
#ifndef RTME_H
#define RTME_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rtme_status {
    RTME_OK = 0,
    RTME_ERR_CONFIG = 1, /* bad usage or configuration */
    RTME_ERR_DATA = 2,   /* unreadable/ill-formed data, mismatched checkpoints */
    RTME_ERR_NUMERIC = 3,/* numeric failure (no log, overflow, ...) */
    RTME_ERR_ARG = 4     /* null pointers, out-of-range scalars */
} rtme_status;

const char* rtme_version(void);
const char* rtme_last_error(void);
/* Newline-separated warnings from the last rtme_estimate_run on this thread. */
const char* rtme_last_warnings(void);
void rtme_string_free(char* s);

/* ---- dense matrix functions (row-major, dim x dim) ---- */

rtme_status rtme_mat_exp(const double* a, int32_t dim, double* out);
rtme_status rtme_mat_log_principal(const double* a, int32_t dim, double* out);
rtme_status rtme_mercator_log(const double* a, int32_t dim, int32_t terms, double* out);

/* eig_re/eig_im receive dim eigenvalues sorted by (re, im). Any output
 * pointer may be NULL to skip it. */
rtme_status rtme_spectrum(const double* a, int32_t dim, double* eig_re, double* eig_im,
                          double* min_modulus, double* dist_to_neg_axis);

rtme_status rtme_is_m_matrix_inverse(const double* p, int32_t dim, int32_t* result);
/* unique_flag: 1 = unique generator guaranteed, 0 = inconclusive. */
rtme_status rtme_generator_uniqueness(const double* p, int32_t dim, int32_t* unique_flag);

/* mode: "diagonal" or "weighted". */
rtme_status rtme_regularize_generator(const double* b, int32_t dim, const char* mode, double* out);

/* One-step transition from an ell-gap transition matrix: exp(log(a)/ell)
 * with generator repair. gen_out may be NULL; regularized may be NULL. */
rtme_status rtme_transition_from_power(const double* a, int32_t dim, int32_t ell, const char* mode,
                                       double* p_out, double* gen_out, int32_t* regularized);

rtme_status rtme_spectral_norm(const double* a, int32_t dim, double* out);

/* ---- streaming accumulator bank (opaque) ---- */

typedef struct rtme_bank rtme_bank;

/* estimator_config_json: same schema as the estimate command's config file. */
rtme_status rtme_bank_create(const char* estimator_config_json, rtme_bank** out);
void rtme_bank_free(rtme_bank* bank);
rtme_status rtme_bank_absorb_file(rtme_bank* bank, const char* dataset_path);
rtme_status rtme_bank_absorb_path_json(rtme_bank* bank, const char* path_json);
rtme_status rtme_bank_merge(rtme_bank* dst, const rtme_bank* src);
rtme_status rtme_bank_save(const rtme_bank* bank, const char* checkpoint_path);
rtme_status rtme_bank_load(const char* checkpoint_path, rtme_bank** out);
rtme_status rtme_bank_n_paths(const rtme_bank* bank, int64_t* out);
/* Full estimation pipeline at every grid point; returns a JSON document the
 * caller frees with rtme_string_free. lag_lo/lag_hi <= 0 use the config. */
rtme_status rtme_bank_estimate_json(const rtme_bank* bank, int32_t lag_lo, int32_t lag_hi,
                                    char** json_out);

/* ---- command-level entry points (the CLI binds these) ----
 * overrides_json may be NULL or "{}"; recognized keys:
 *   seed (integer), lags ([lo, hi]), grid (string), strict (bool),
 *   threads (integer).
 */

rtme_status rtme_simulate_run(const char* config_path, const char* out_path,
                              const char* overrides_json);
rtme_status rtme_estimate_run(const char* dataset_path, const char* config_path,
                              const char* checkpoint_in, const char* out_path,
                              const char* checkpoint_out, const char* overrides_json);
rtme_status rtme_update_run(const char* checkpoint_in, const char* config_path,
                            const char* dataset_path, const char* checkpoint_out,
                            const char* overrides_json);
/* summary_table_out (optional): printable summary, freed by rtme_string_free. */
rtme_status rtme_experiment_run(const char* spec_path, const char* out_dir,
                                const char* overrides_json, char** summary_table_out);

#ifdef __cplusplus
}
#endif

#endif /* RTME_H */
