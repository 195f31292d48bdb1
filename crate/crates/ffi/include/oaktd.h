#ifndef OAKTD_H
#define OAKTD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OaktdStatus {
  OAKTD_STATUS_OK = 0,
  OAKTD_STATUS_NULL_POINTER = 1,
  OAKTD_STATUS_INVALID_ARGUMENT = 2,
  OAKTD_STATUS_CONFIG = 3,
  OAKTD_STATUS_NON_FINITE = 4,
  OAKTD_STATUS_IO = 5,
  OAKTD_STATUS_BUFFER_TOO_SMALL = 6,
  OAKTD_STATUS_PANIC = 7,
} OaktdStatus;

/**
 * A resolved, validated experiment configuration.
 */
typedef struct OaktdConfig OaktdConfig;

/**
 * A running environment instance with its own random stream.
 */
typedef struct OaktdEnv OaktdEnv;

/**
 * A trained agent together with its evaluation log.
 */
typedef struct OaktdModel OaktdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *oaktd_last_error_message(void);

/**
 * Creates an environment (`mountain-car`, `acrobot`, `cartpole`, `puddle-world`)
 * seeded with `seed`, already reset to a start state.
 *
 * # Safety
 * `name` must be a valid C string and `out` a valid pointer.
 */
enum OaktdStatus oaktd_env_new(const char *name, uint64_t seed, struct OaktdEnv **out);

/**
 * # Safety
 * `env` must come from [`oaktd_env_new`] and not be used afterwards. Null is ignored.
 */
void oaktd_env_free(struct OaktdEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
size_t oaktd_env_state_dim(const struct OaktdEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
size_t oaktd_env_action_count(const struct OaktdEnv *env);

/**
 * Copies the current state into `out` (`capacity` values available).
 *
 * # Safety
 * `env` must be a live handle and `out` must hold `capacity` doubles.
 */
enum OaktdStatus oaktd_env_state(const struct OaktdEnv *env, double *out, size_t capacity);

/**
 * Starts a new episode and writes its start state into `out`.
 *
 * # Safety
 * `env` must be a live handle and `out` must hold `capacity` doubles.
 */
enum OaktdStatus oaktd_env_reset(struct OaktdEnv *env, double *out, size_t capacity);

/**
 * Applies `action`; writes the next state, reward and terminal flag.
 * After a terminal step the caller should reset.
 *
 * # Safety
 * `env` must be a live handle, `out` must hold `capacity` doubles and
 * `reward`/`terminal` must be valid pointers.
 */
enum OaktdStatus oaktd_env_step(struct OaktdEnv *env,
                                size_t action,
                                double *out,
                                size_t capacity,
                                double *reward,
                                bool *terminal);

/**
 * Default configuration for environment `env_name`.
 *
 * # Safety
 * `env_name` must be a valid C string and `out` a valid pointer.
 */
enum OaktdStatus oaktd_config_new(const char *env_name, struct OaktdConfig **out);

/**
 * Parses a flat `key = value` configuration text.
 *
 * # Safety
 * `body` must be a valid C string and `out` a valid pointer.
 */
enum OaktdStatus oaktd_config_parse(const char *body, struct OaktdConfig **out);

/**
 * Sets one key; the configuration is left unchanged if the result is invalid.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` valid C strings.
 */
enum OaktdStatus oaktd_config_set(struct OaktdConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. Null is ignored.
 */
void oaktd_config_free(struct OaktdConfig *config);

/**
 * Trains one seed of `config` to completion.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum OaktdStatus oaktd_train(const struct OaktdConfig *config,
                             uint64_t seed,
                             struct OaktdModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void oaktd_model_free(struct OaktdModel *model);

/**
 * Learned value of a physical state.
 *
 * # Safety
 * `model` must be a live handle, `state` must hold `len` doubles and `out` be valid.
 */
enum OaktdStatus oaktd_model_value(const struct OaktdModel *model,
                                   const double *state,
                                   size_t len,
                                   double *out);

/**
 * Number of dictionary prototypes; 0 for tile coding.
 *
 * # Safety
 * `model` must be a live handle and `out` valid.
 */
enum OaktdStatus oaktd_model_dictionary_size(const struct OaktdModel *model, size_t *out);

/**
 * Number of evaluation points recorded while training.
 *
 * # Safety
 * `model` must be a live handle.
 */
size_t oaktd_model_eval_count(const struct OaktdModel *model);

/**
 * Evaluation point `index`: step, mean and population std of greedy returns.
 *
 * # Safety
 * `model` must be a live handle; output pointers must be valid.
 */
enum OaktdStatus oaktd_model_eval(const struct OaktdModel *model,
                                  size_t index,
                                  uint64_t *step,
                                  double *mean_return,
                                  double *std_return);

/**
 * Attention of a physical state over the dictionary of an OAKTD model.
 * `written` receives the dictionary size.
 *
 * # Safety
 * `model` must be a live handle, `state` must hold `len` doubles, `out`
 * must hold `capacity` doubles and `written` be valid.
 */
enum OaktdStatus oaktd_model_attention(const struct OaktdModel *model,
                                       const double *state,
                                       size_t len,
                                       double *out,
                                       size_t capacity,
                                       size_t *written);

/**
 * Writes the model as JSON.
 *
 * # Safety
 * `model` must be a live handle and `path` a valid C string.
 */
enum OaktdStatus oaktd_model_save(const struct OaktdModel *model, const char *path);

/**
 * Reads a model written by [`oaktd_model_save`] or the command-line tool.
 * The evaluation log is not stored in snapshots, so the loaded model has none.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum OaktdStatus oaktd_model_load(const char *path, struct OaktdModel **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OAKTD_H */
