/* capekit — CAPE-based long-horizon return modeling toolkit.
 *
 * C interface of the shared library. All functions return CK_OK (0) on
 * success or a nonzero ck_status; the thread-local message behind
 * ck_last_error() describes the most recent failure. Objects are opaque
 * handles released with their matching *_free function. Handles are safe to
 * share across threads for reading; creation and destruction are not
 * synchronized.
 */

#ifndef CAPEKIT_H
#define CAPEKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ck_status {
  CK_OK = 0,
  CK_ERROR_CONFIG = 2,  /* options, schemas, file formats */
  CK_ERROR_DATA = 3,    /* series content violates a precondition */
  CK_ERROR_NUMERIC = 4  /* constraint violations, singular systems */
} ck_status;

typedef struct ck_series ck_series;           /* monthly market series with derived ratios */
typedef struct ck_params ck_params;           /* dynamical system parameter set */
typedef struct ck_regression ck_regression;   /* augmented predictive regression */
typedef struct ck_bootstrap ck_bootstrap;     /* residual bootstrap result */
typedef struct ck_calibration ck_calibration; /* full parameter estimation report */
typedef struct ck_scenarios ck_scenarios;     /* Monte Carlo yield scenarios */

/* Message describing the most recent error on this thread. */
const char* ck_last_error(void);
const char* ck_version(void);
/* Frees strings returned through char** out-parameters. */
void ck_string_free(char* s);

/* ---- market data ------------------------------------------------------- */

/* Loads a monthly CSV file. column_map_path names a "key = value" file
 * mapping the roles date/price/dividend/earnings/cpi (and optionally ep, a
 * pre-smoothed earnings-price splice) to CSV headers; pass NULL to
 * auto-detect Date/P/D/E/CPI style headers. base_month ("YYYY.MM") anchors
 * the CPI deflation; NULL uses the last month. */
ck_status ck_series_load_csv(const char* csv_path, const char* column_map_path,
                             const char* base_month, ck_series** out);
void ck_series_free(ck_series* s);

int64_t ck_series_length(const ck_series* s);
ck_status ck_series_month_at(const ck_series* s, int64_t index, int* year, int* month);
/* Fields: P, D, E, CAPE, logEP, logDP, H. NaN = undefined at that month. */
double ck_series_value(const ck_series* s, const char* field, int64_t index);
ck_status ck_series_write_derived_csv(const ck_series* s, const char* path);
/* y_{t,h} with its price/dividend split; any output pointer may be NULL. */
ck_status ck_series_yield(const ck_series* s, int64_t t, int horizon, double* yield,
                          double* price_part, double* dividend_part);

/* ---- predictive regression --------------------------------------------- */

/* Augmented low-bias regression of horizon-month gross yields on the lagged
 * log smoothed earnings-price ratio. overlapping != 0 uses monthly steps,
 * otherwise windows stride by the horizon. */
ck_status ck_regress(const ck_series* s, int horizon, int overlapping, ck_regression** out);
void ck_regression_free(ck_regression* r);
/* Statistics: alpha_c, beta_c, phi_c, se_beta_c, t_stat, n, rho_ols, rho_c,
 * alpha_ols, beta_ols, cov_uu, cov_uv, cov_vv. Monthly units. NaN if unknown. */
double ck_regression_stat(const ck_regression* r, const char* name);
ck_status ck_regression_to_kv(const ck_regression* r, char** out_text);

/* ---- bootstrap test ----------------------------------------------------- */

/* Residual resampling test of the no-predictability null for the same
 * regression layout. Deterministic for a given seed. */
ck_status ck_bootstrap_run(const ck_series* s, int horizon, long replications, uint64_t seed,
                           ck_bootstrap** out);
void ck_bootstrap_free(ck_bootstrap* b);
double ck_bootstrap_p_value(const ck_bootstrap* b);
int ck_bootstrap_degenerate(const ck_bootstrap* b);
int ck_bootstrap_mirrored(const ck_bootstrap* b);
int64_t ck_bootstrap_count(const ck_bootstrap* b);
double ck_bootstrap_sample(const ck_bootstrap* b, int64_t index);
double ck_bootstrap_observed(const ck_bootstrap* b);
ck_status ck_bootstrap_write_samples_csv(const ck_bootstrap* b, const char* path);
ck_status ck_bootstrap_to_kv(const ck_bootstrap* b, char** out_text);

/* ---- model parameters --------------------------------------------------- */

/* Key-value parameter files; see the README for the key set and the
 * "units = month" / "units = table" conventions. */
ck_status ck_params_load(const char* path, ck_params** out);
ck_status ck_params_from_text(const char* text, ck_params** out);
ck_status ck_params_save(const ck_params* p, const char* path);
ck_status ck_params_get(const ck_params* p, const char* key, double* out_value);
void ck_params_free(ck_params* p);

/* Closed forms of the dynamical system (all rates monthly). */
ck_status ck_asymptotic_yield(const ck_params* p, double log_ep0, double* out);
ck_status ck_expected_yield(const ck_params* p, int horizon, double log_ep0, double log_dp0,
                            double mu0, double* out);
ck_status ck_yield_variance(const ck_params* p, int horizon, double log_ep0, double log_dp0,
                            double* out);
ck_status ck_leading_correction(const ck_params* p, double log_ep0, double log_dp0, double* out);
ck_status ck_damping_scale(const ck_params* p, double* out);
/* Transient eigenvalues lambda_plus / lambda_minus of the system matrix. */
ck_status ck_eigenvalues(const ck_params* p, double* lambda_plus, double* lambda_minus);

/* ---- calibration -------------------------------------------------------- */

/* Estimates every parameter from a series. options_text is an optional
 * key-value string: horizon (12), overlapping (1), window (192), step (1),
 * alpha_h / beta_h (0.85 / -0.85), sigma_p_horizons ("24:192:12"). */
ck_status ck_calibrate(const ck_series* s, const char* options_text, ck_calibration** out);
void ck_calibration_free(ck_calibration* c);
ck_status ck_calibration_params(const ck_calibration* c, ck_params** out);
ck_status ck_calibration_to_kv(const ck_calibration* c, char** out_text);

/* ---- scenarios ----------------------------------------------------------- */

/* Monte Carlo yields over a horizon grid ("start:stop:step"). Initial
 * conditions cycle through the admissible historical months of the series;
 * one path per starting month when n_paths is 0. */
ck_status ck_simulate_series(const ck_params* p, const ck_series* s, const char* horizons,
                             long n_paths, uint64_t seed, ck_scenarios** out);
/* Single explicit initial condition. */
ck_status ck_simulate_point(const ck_params* p, double log_ep0, double log_dp0, double mu0,
                            const char* horizons, long n_paths, uint64_t seed,
                            ck_scenarios** out);
void ck_scenarios_free(ck_scenarios* sc);
int64_t ck_scenarios_paths(const ck_scenarios* sc);
int64_t ck_scenarios_horizons(const ck_scenarios* sc);
ck_status ck_scenarios_point(const ck_scenarios* sc, int64_t path, int64_t horizon_index,
                             int* horizon, double* log_ep0, double* yield);
ck_status ck_scenarios_write_csv(const ck_scenarios* sc, const char* path);

/* Analytical confidence band (center + z * sqrt(yield variance)) written as
 * CSV horizon,center,low,high. finite_center != 0 uses the finite-horizon
 * expectation, otherwise the long-run asymptote. */
ck_status ck_band_write_csv(const ck_params* p, const char* horizons, double log_ep0,
                            double log_dp0, double z, int finite_center, const char* path);

/* Fraction of historical points inside the per-point band, per horizon;
 * rendered as a text table. */
ck_status ck_compare_history(const ck_series* s, const ck_params* p, const char* horizons,
                             double z, char** out_text, double* overall_fraction);

/* ---- validation ---------------------------------------------------------- */

/* Runs the internal consistency battery. Returns CK_OK even when checks
 * fail; *out_failures carries the count. */
ck_status ck_validate(int quick, uint64_t seed, char** out_report, int* out_failures);

#ifdef __cplusplus
}
#endif

#endif /* CAPEKIT_H */
