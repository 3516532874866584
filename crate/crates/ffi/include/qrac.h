#ifndef QRAC_H
#define QRAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QracStatus {
  QRAC_STATUS_OK = 0,
  QRAC_STATUS_NULL_POINTER = 1,
  QRAC_STATUS_INVALID_DIMENSION = 2,
  QRAC_STATUS_INVALID_ARGUMENT = 3,
  QRAC_STATUS_OUT_OF_RANGE = 4,
  QRAC_STATUS_SHAPE = 5,
  QRAC_STATUS_ENCODING = 6,
  QRAC_STATUS_NOT_AVAILABLE = 7,
  QRAC_STATUS_INFEASIBLE = 8,
  QRAC_STATUS_IO = 9,
  QRAC_STATUS_INTERNAL = 10,
} QracStatus;

/**
 * Task variant selector for [`qrac_protocol_run`] and [`qrac_trivial_strategy`].
 */
typedef enum QracVariant {
  QRAC_VARIANT_TWO_STRINGS = 0,
  QRAC_VARIANT_FOUR_DITS_PAIRS = 1,
  QRAC_VARIANT_FOUR_DITS_SINGLE = 2,
} QracVariant;

/**
 * Opaque protocol report.
 */
typedef struct QracReport QracReport;

/**
 * Opaque encoding table.
 */
typedef struct QracTable QracTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Why the last call on this thread failed, or null if it succeeded. Valid until the next call.
 */
const char *qrac_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qrac_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void qrac_string_free(char *s);

/**
 * Published table for `d` in 2..=4.
 */
enum QracStatus qrac_table_builtin(size_t d, struct QracTable **table);

/**
 * Run-structured single-distance table for any `d ≥ 2`.
 */
enum QracStatus qrac_table_generate(size_t d, struct QracTable **table);

/**
 * Builds a table from `2·len` digits `first0, second0, first1, …`.
 *
 * # Safety
 * `digits` must point to `2 * len` readable values.
 */
enum QracStatus qrac_table_new(size_t d,
                               const size_t *digits,
                               size_t len,
                               struct QracTable **table);

/**
 * # Safety
 * `table` must be null or a handle from this library, freed at most once.
 */
void qrac_table_free(struct QracTable *table);

enum QracStatus qrac_table_len(const struct QracTable *table, size_t *len);

enum QracStatus qrac_table_get(const struct QracTable *table,
                               size_t index,
                               size_t *first,
                               size_t *second);

/**
 * Whether the table is a bijection with single-distance cyclic steps.
 */
enum QracStatus qrac_table_is_valid(const struct QracTable *table, bool *valid);

/**
 * Runs the protocol; a null `table` selects the standard table for `d`.
 */
enum QracStatus qrac_protocol_run(size_t d,
                                  const struct QracTable *table,
                                  enum QracVariant variant,
                                  struct QracReport **report);

enum QracStatus qrac_trivial_strategy(size_t d,
                                      enum QracVariant variant,
                                      struct QracReport **report);

/**
 * # Safety
 * `report` must be null or a handle from this library, freed at most once.
 */
void qrac_report_free(struct QracReport *report);

enum QracStatus qrac_report_p_avg(const struct QracReport *report, double *value);

enum QracStatus qrac_report_p_min(const struct QracReport *report, double *value);

/**
 * Average success for one choice key such as `"c=0"` or `"a0a2"`.
 *
 * # Safety
 * `choice` must be null or a NUL-terminated string.
 */
enum QracStatus qrac_report_per_choice(const struct QracReport *report,
                                       const char *choice,
                                       double *value);

/**
 * Report as JSON; release with [`qrac_string_free`].
 */
enum QracStatus qrac_report_to_json(const struct QracReport *report, char **json);

/**
 * Simulated entanglement fidelity of teleportation with `k` outcomes.
 */
enum QracStatus qrac_teleport_fidelity(size_t d, size_t k, double *fidelity);

enum QracStatus qrac_split_strategy(size_t d, size_t k_prime, double *probability);

enum QracStatus qrac_favored_strategy(size_t d, double *probability);

enum QracStatus qrac_composite_fidelity(size_t d, double *fidelity);

enum QracStatus qrac_symmetric_bound(size_t d, size_t n, int64_t *numerator, int64_t *denominator);

enum QracStatus qrac_werner_fidelity(size_t n1,
                                     size_t n2,
                                     size_t d,
                                     int64_t *numerator,
                                     int64_t *denominator);

enum QracStatus qrac_asym_closed_form(double p, size_t d, double *value);

/**
 * Maximizes over `n` receivers; `point` may be null, otherwise it receives `n` values.
 *
 * # Safety
 * `probabilities` must point to `n` readable values and `point`, when not
 * null, to `n` writable ones.
 */
enum QracStatus qrac_asym_optimize(size_t d,
                                   const double *probabilities,
                                   size_t n,
                                   size_t restarts,
                                   uint64_t seed,
                                   double *value,
                                   double *point);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRAC_H */
