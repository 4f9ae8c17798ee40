/* crda: curriculum + RL data-augmentation training engine.
 *
 * C89-compatible interface over the C++ core. All functions return a
 * crda_status; outputs go through pointers. Call crda_last_error() for a
 * human-readable message after any non-OK status (thread-local storage).
 */
#ifndef CRDA_H
#define CRDA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CRDA_API __declspec(dllexport)
#else
#define CRDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crda_status {
  CRDA_OK = 0,
  CRDA_ERR_CONFIG = 2,  /* invalid configuration or unknown key */
  CRDA_ERR_NUMERIC = 3, /* non-finite value or numeric contract violation */
  CRDA_ERR_IO = 4,      /* file system failure */
  CRDA_ERR_INVALID = 5  /* null pointer or misuse of the API itself */
} crda_status;

/* Message for the most recent failure on this thread; never NULL. */
CRDA_API const char* crda_last_error(void);

/* ---- configuration ------------------------------------------------- */

typedef struct crda_config crda_config;

CRDA_API crda_config* crda_config_new(void);
CRDA_API void crda_config_free(crda_config* cfg);

/* Replaces the config with the parsed file contents. */
CRDA_API crda_status crda_config_load_file(crda_config* cfg, const char* path);

/* Sets one "section.key" to a value given as text, e.g. ("ppo.clip", "0.1"). */
CRDA_API crda_status crda_config_set(crda_config* cfg, const char* dotted_key,
                                     const char* value);

CRDA_API crda_status crda_config_set_seed(crda_config* cfg, uint64_t seed);
CRDA_API crda_status crda_config_set_out_dir(crda_config* cfg, const char* dir);

/* Validates every section; returns CRDA_ERR_CONFIG naming the bad key. */
CRDA_API crda_status crda_config_validate(crda_config* cfg);

/* Serializes the full effective config. Free the result with
 * crda_string_free. */
CRDA_API crda_status crda_config_serialize(const crda_config* cfg, char** out);

/* Reads back one "section.key" as text. Free the result with
 * crda_string_free. */
CRDA_API crda_status crda_config_get(const crda_config* cfg, const char* dotted_key,
                                     char** out);

CRDA_API void crda_string_free(char* s);

/* ---- training ------------------------------------------------------ */

typedef struct crda_run_summary {
  int32_t epochs_run;
  double final_val_auc;
  double final_shift_auc;
  double final_train_ce;
  double wall_ms;
} crda_run_summary;

/* Runs the training loop; writes metrics.jsonl, timing.jsonl, summary.json,
 * effective_config and final.crda under the configured output directory.
 * `summary` may be NULL. */
CRDA_API crda_status crda_train(const crda_config* cfg, crda_run_summary* summary);

/* Applies ablation preset 1..5 (1 = everything off, 5 = everything on) and
 * trains into <out_dir>/ablate_<preset>. */
CRDA_API crda_status crda_ablate(const crda_config* cfg, int preset,
                                 crda_run_summary* summary);

/* Loads a .crda checkpoint under the given config and evaluates it on the
 * seeded validation and spurious-shift sets. */
CRDA_API crda_status crda_eval_checkpoint(const crda_config* cfg, const char* path,
                                          double* val_auc, double* shift_auc);

/* ---- schedules and oracles ------------------------------------------ */

/* CSV "t,q,beta,area_raw,area_clamped", one row per epoch t = 0..tau.
 * Free with crda_string_free. */
CRDA_API crda_status crda_schedules_csv(const crda_config* cfg, char** out);

/* Rank-based ROC AUC; labels are 0/1 and both classes must appear. */
CRDA_API crda_status crda_auc(const double* scores, const int32_t* labels, size_t n,
                              double* out);

/* GAE advantages/returns. values has n+1 entries (bootstrap last). Outputs
 * are the raw (unnormalized) advantages and returns, n entries each. */
CRDA_API crda_status crda_gae(const double* rewards, const double* values, size_t n,
                              double discount, double gae_lambda, double* out_advantages,
                              double* out_returns);

/* Entropy-band environment partition. Writes one environment index (0 =
 * dominant, 1..3 = adversarial bands) per entry. */
CRDA_API crda_status crda_partition(const double* entropies, size_t n,
                                    int32_t* out_env);

#ifdef __cplusplus
}
#endif

#endif /* CRDA_H */
