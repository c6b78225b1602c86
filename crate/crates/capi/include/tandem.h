#ifndef TANDEM_H
#define TANDEM_H

/* Generated by cbindgen from tandem-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this API.
 */
typedef enum TandemStatus {
  TANDEM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TANDEM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TANDEM_STATUS_INVALID_UTF8 = 2,
  /**
   * A parameter was out of range or named an unknown entity.
   */
  TANDEM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The instance file or text did not parse.
   */
  TANDEM_STATUS_PARSE_ERROR = 4,
  /**
   * The solver failed at runtime.
   */
  TANDEM_STATUS_RUNTIME_ERROR = 5,
} TandemStatus;

/**
 * Opaque problem handle: a parsed instance plus its composite model.
 */
typedef struct TandemProblem TandemProblem;

/**
 * Summary of one seeded run.
 */
typedef struct TandemRunStats {
  double best_value;
  uint64_t evaluations;
  uint64_t iterations;
  uint64_t wall_ms;
  uint64_t seed;
} TandemRunStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *tandem_version(void);

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tandem_last_error(void);

/**
 * Load an instance file. `kind` is "ttp" or "killersudoku". On success,
 * writes a handle to `out`; free it with [`tandem_problem_free`].
 *
 * # Safety
 * `kind` and `path` must be null or valid NUL-terminated strings; `out`
 * must be a valid pointer to pointer storage.
 */
enum TandemStatus tandem_problem_load(const char *kind,
                                      const char *path,
                                      struct TandemProblem **out);

/**
 * [`tandem_problem_load`] for instance text already in memory.
 *
 * # Safety
 * As [`tandem_problem_load`], with `text` in place of `path`.
 */
enum TandemStatus tandem_problem_from_text(const char *kind,
                                           const char *text,
                                           struct TandemProblem **out);

/**
 * Free a problem handle. Null is a no-op.
 *
 * # Safety
 * `problem` must be null or a handle returned by this library that has not
 * been freed yet.
 */
void tandem_problem_free(struct TandemProblem *problem);

/**
 * Number of components, or -1 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle from this library.
 */
int32_t tandem_problem_component_count(const struct TandemProblem *problem);

/**
 * Identifier of the component at `index`, or null when out of range. The
 * pointer stays valid while the problem handle lives.
 *
 * # Safety
 * `problem` must be null or a live handle from this library.
 */
const char *tandem_problem_component_id(const struct TandemProblem *problem, size_t index);

/**
 * Run one seeded search. `algorithm` is one of "jls", "ils", "sa",
 * "cosolver", "ea" with library-default parameters. `max_evaluations`
 * bounds the objective budget; 0 selects the default stop condition (one
 * stale pass plus a million-evaluation safety cap).
 *
 * # Safety
 * `problem` must be a live handle; `algorithm` a valid NUL-terminated
 * string; `out_stats` valid for writes.
 */
enum TandemStatus tandem_solve(const struct TandemProblem *problem,
                               const char *algorithm,
                               uint64_t seed,
                               uint64_t max_evaluations,
                               struct TandemRunStats *out_stats);

/**
 * Run the dependency detector for `dependent <- dependee` (component ids)
 * and write the verdict to `out_dependent`.
 *
 * # Safety
 * `problem` must be a live handle; the id arguments valid NUL-terminated
 * strings; `out_dependent` valid for writes.
 */
enum TandemStatus tandem_detect_dependency(const struct TandemProblem *problem,
                                           const char *dependee,
                                           const char *dependent,
                                           uint32_t sample_count,
                                           uint64_t seed,
                                           bool *out_dependent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TANDEM_H */
