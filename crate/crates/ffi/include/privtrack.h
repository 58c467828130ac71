#ifndef PRIVTRACK_H
#define PRIVTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtLearnerKind {
  PT_LEARNER_KIND_LAZY_RNM = 0,
  PT_LEARNER_KIND_SVT_RESTART = 1,
  PT_LEARNER_KIND_NOISY_MWA = 2,
  PT_LEARNER_KIND_MWA = 3,
  PT_LEARNER_KIND_META_REDUCTION = 4,
} PtLearnerKind;

typedef enum PtProbe {
  PT_PROBE_EXACT = 0,
  PT_PROBE_GEOMETRIC = 1,
} PtProbe;

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_NULL_POINTER = 1,
  PT_STATUS_INVALID_ARGUMENT = 2,
  PT_STATUS_STATE = 3,
  PT_STATUS_RESOURCE_CAP = 4,
  PT_STATUS_CONFIG = 5,
  PT_STATUS_IO = 6,
  PT_STATUS_PANIC = 7,
} PtStatus;

/**
 * Opaque learner handle.
 */
typedef struct PtLearner PtLearner;

/**
 * Learner parameters. `beta <= 0` selects `1 / T`; a NaN `eta` selects the
 * learner's default step size.
 */
typedef struct PtLearnerParams {
  enum PtLearnerKind kind;
  size_t experts;
  size_t horizon;
  size_t switches;
  double epsilon;
  double beta;
  double eta;
  enum PtProbe probe;
  uint64_t meta_cap;
} PtLearnerParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Free with
 * [`pt_string_free`].
 */
char *pt_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pt_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *pt_version(void);

/**
 * Creates a learner. All randomness derives from `seed`.
 *
 * # Safety
 * `params` must point to a valid struct and `out` to writable storage.
 */
enum PtStatus pt_learner_new(const struct PtLearnerParams *params,
                             uint64_t seed,
                             struct PtLearner **out);

/**
 * # Safety
 * `learner` must come from [`pt_learner_new`] and not have been freed.
 */
void pt_learner_free(struct PtLearner *learner);

/**
 * Expert to play this round.
 *
 * # Safety
 * `learner` must be a live handle and `expert` writable.
 */
enum PtStatus pt_learner_select(struct PtLearner *learner, size_t *expert);

/**
 * Feeds the loss vector of the round just played. `restarted` may be null.
 *
 * # Safety
 * `learner` must be a live handle and `losses` must hold `len` values.
 */
enum PtStatus pt_learner_observe(struct PtLearner *learner,
                                 const double *losses,
                                 size_t len,
                                 bool *restarted);

/**
 * Number of completed rounds, or 0 for a null handle.
 *
 * # Safety
 * `learner` must be null or a live handle.
 */
size_t pt_learner_rounds(const struct PtLearner *learner);

/**
 * The privacy ledger as a JSON array of `{round, mechanism, epsilon}`.
 *
 * # Safety
 * `learner` must be a live handle and `json` writable.
 */
enum PtStatus pt_learner_ledger_json(const struct PtLearner *learner, char **json);

/**
 * Exact best loss over expert sequences with at most `switches` switches.
 * `losses` is row-major `rounds x experts`; `path` (optional) receives the
 * `rounds` expert indices of a minimiser.
 *
 * # Safety
 * `losses` must hold `rounds * experts` values, `value` must be writable and
 * `path`, when not null, must hold `rounds` slots.
 */
enum PtStatus pt_dynamic_comparator(const double *losses,
                                    size_t rounds,
                                    size_t experts,
                                    size_t switches,
                                    double *value,
                                    size_t *path);

/**
 * KL projection of the positive vector `v` onto `{w : sum w = 1, w >= floor}`.
 *
 * # Safety
 * `v` and `out` must each hold `len` values.
 */
enum PtStatus pt_kl_project(const double *v, size_t len, double floor, double *out);

/**
 * Number of meta-experts with at most `switches` switch times, saturating
 * at `u64::MAX`.
 */
uint64_t pt_meta_expert_count(size_t horizon, size_t experts, size_t switches);

/**
 * Runs the batch described by a TOML config file and returns the aggregate
 * report as JSON.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string and `report_json` writable.
 */
enum PtStatus pt_run_config(const char *config_path, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIVTRACK_H */
