/* SPDX-License-Identifier: Apache-2.0 */
#ifndef FINRAG_FINRAG_H
#define FINRAG_FINRAG_H

#include <stddef.h>

#if defined(FINRAG_BUILDING_LIBRARY)
#define FINRAG_API __attribute__((visibility("default")))
#else
#define FINRAG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command-line tool. */
typedef enum finrag_status {
  FINRAG_OK = 0,
  FINRAG_ERR_USAGE = 1,
  FINRAG_ERR_INPUT = 2,
  FINRAG_ERR_PROVIDER = 3,
  FINRAG_ERR_REFINEMENT = 4,
  FINRAG_ERR_BACKTEST = 5,
  FINRAG_ERR_INTERNAL = 6
} finrag_status;

typedef struct finrag_session finrag_session;

typedef struct finrag_metrics {
  double cumulative_return;
  double annualized_return;
  double annualized_volatility;
  double sharpe_ratio;
  double max_drawdown;
  size_t trading_days;
} finrag_metrics;

FINRAG_API const char* finrag_version(void);

/* Message of the most recent failure on the calling thread; "" if none. */
FINRAG_API const char* finrag_last_error(void);

/* A NULL or empty path uses the built-in defaults. FINRAG_* environment
   variables are read at every command. */
FINRAG_API finrag_status finrag_session_open(const char* config_path, finrag_session** out);
FINRAG_API void finrag_session_close(finrag_session* session);

/* Overrides one "section.key" setting; takes precedence over file and environment. */
FINRAG_API finrag_status finrag_session_set_option(finrag_session* session, const char* key,
                                                   const char* value);

/* Commands. On success *out_json receives a JSON document to release with
   finrag_string_free. validate_only loads and checks inputs without writing. */
FINRAG_API finrag_status finrag_ingest(finrag_session* session, int validate_only, char** out_json);
FINRAG_API finrag_status finrag_predict(finrag_session* session, const char* symbol, const char* date,
                                        const char* text, const char* weights_path, char** out_json);
FINRAG_API finrag_status finrag_refine(finrag_session* session, int validate_only, char** out_json);
FINRAG_API finrag_status finrag_backtest(finrag_session* session, const char* weights_path,
                                         int validate_only, char** out_json);
FINRAG_API finrag_status finrag_report(finrag_session* session, const char* retrieval_log_path,
                                       int validate_only, char** out_json);

FINRAG_API void finrag_string_free(char* text);

/* Stateless primitives. */
FINRAG_API double finrag_woc(const char* const* x, size_t nx, const char* const* y, size_t ny,
                             double weight);
FINRAG_API void finrag_normalize_action(const double* raw, size_t k, double* out);
FINRAG_API double finrag_ppo_objective(double ratio, double advantage, double epsilon);
/* sharpe_ratio is NaN and the status FINRAG_ERR_BACKTEST when volatility is zero. */
FINRAG_API finrag_status finrag_compute_metrics(const double* curve, size_t n, finrag_metrics* out);

#ifdef __cplusplus
}
#endif

#endif /* FINRAG_FINRAG_H */
