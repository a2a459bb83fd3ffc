#ifndef IRTCAT_H
#define IRTCAT_H

/* C interface to the irtcat engine. Every call returns a status; on failure
 * irtcat_last_error() holds a message for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(IRTCAT_BUILDING)
#define IRTCAT_API __attribute__((visibility("default")))
#else
#define IRTCAT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum irtcat_status {
  IRTCAT_OK = 0,
  IRTCAT_INVALID_ARGUMENT = 1,
  IRTCAT_PARSE_ERROR = 2,
  IRTCAT_VALIDATION_ERROR = 3,
  IRTCAT_CONVERGENCE_ERROR = 4,
  IRTCAT_IO_ERROR = 5,
  IRTCAT_OUT_OF_ITEMS = 6,
  IRTCAT_INSUFFICIENT_DATA = 7,
  IRTCAT_DEGENERATE_POSTERIOR = 8,
  IRTCAT_INTERNAL_ERROR = 9
} irtcat_status;

IRTCAT_API const char* irtcat_version(void);
IRTCAT_API const char* irtcat_status_name(irtcat_status status);
/* Message of the last failed call on this thread ("" if none). */
IRTCAT_API const char* irtcat_last_error(void);
/* Summary of the last successful irtcat_run / irtcat_rerun on this thread. */
IRTCAT_API const char* irtcat_last_summary(void);

IRTCAT_API irtcat_status irtcat_prob_correct(double theta, double a, double b, double c, double* out);
IRTCAT_API irtcat_status irtcat_item_information(double theta, double a, double b, double c,
                                                 double* out);

/* Item banks. Strings returned by irtcat_bank_item live as long as the bank. */
typedef struct irtcat_bank irtcat_bank;

typedef struct irtcat_item {
  const char* item_id;
  double a;
  double b;
  double c;
  const char* construct_id; /* NULL when unset */
  uint64_t response_count;
} irtcat_item;

IRTCAT_API irtcat_status irtcat_bank_load(const char* path, irtcat_bank** out);
IRTCAT_API irtcat_status irtcat_bank_save(const irtcat_bank* bank, const char* path);
IRTCAT_API size_t irtcat_bank_size(const irtcat_bank* bank);
IRTCAT_API irtcat_status irtcat_bank_item(const irtcat_bank* bank, size_t index, irtcat_item* out);
IRTCAT_API void irtcat_bank_free(irtcat_bank* bank);

/* Live adaptive sessions. The session copies the bank. config_json holds
 * session settings (warmup_length, theta0_mean, theta0_sd, criterion,
 * exploration, policy) and may be NULL; cold-start selection is on unless
 * the config turns it off. */
typedef struct irtcat_session irtcat_session;

typedef enum irtcat_decision {
  IRTCAT_CONTINUE = 0,
  IRTCAT_CONVERGED = 1,
  IRTCAT_FORCED_STOP = 2
} irtcat_decision;

IRTCAT_API irtcat_status irtcat_session_create(const irtcat_bank* bank, const char* config_json,
                                               uint64_t seed, irtcat_session** out);
/* Chooses the next item (bank index). Calling again before recording an
 * answer returns the same item. IRTCAT_OUT_OF_ITEMS when none is left. */
IRTCAT_API irtcat_status irtcat_session_next_item(irtcat_session* session, size_t* index);
/* Records the answer to the pending item; `index` must match it. */
IRTCAT_API irtcat_status irtcat_session_record(irtcat_session* session, size_t index, int correct);
IRTCAT_API irtcat_status irtcat_session_check(const irtcat_session* session, irtcat_decision* out);
IRTCAT_API irtcat_status irtcat_session_ability(const irtcat_session* session, double* theta,
                                                double* standard_error, size_t* n_responses);
IRTCAT_API size_t irtcat_session_length(const irtcat_session* session);
IRTCAT_API irtcat_status irtcat_session_write_trace(const irtcat_session* session, const char* path);
IRTCAT_API void irtcat_session_free(irtcat_session* session);

/* Batch commands, as run by the command-line tool. */
typedef struct irtcat_input {
  const char* role; /* bank, responses, events, labels, item_levels, truth */
  const char* path;
} irtcat_input;

typedef struct irtcat_run_options {
  const char* config_path; /* JSON file, or NULL */
  const char* config_json; /* inline JSON, or NULL; overrides config_path */
  const irtcat_input* inputs;
  size_t n_inputs;
  const char* out;
  int has_seed;
  uint64_t seed;
  unsigned workers; /* 0 means 1 */
} irtcat_run_options;

IRTCAT_API irtcat_status irtcat_run(const char* command, const char* subcommand,
                                    const irtcat_run_options* options);
/* Repeats the run recorded in a manifest, writing to `out`. */
IRTCAT_API irtcat_status irtcat_rerun(const char* manifest_path, const char* out, unsigned workers);

#ifdef __cplusplus
}
#endif

#endif
