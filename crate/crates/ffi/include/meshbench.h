#ifndef MESHBENCH_H
#define MESHBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MbStatus {
  MB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MB_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument had an invalid value (unknown task name, bad index, ...).
   */
  MB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A string argument was not valid UTF-8.
   */
  MB_STATUS_INVALID_UTF8 = 3,
  /**
   * Reading or writing a file failed.
   */
  MB_STATUS_IO = 4,
  /**
   * Topology generation or parsing failed.
   */
  MB_STATUS_TOPOLOGY = 5,
  /**
   * An experiment or run could not be completed.
   */
  MB_STATUS_RUN = 6,
  /**
   * The brute-force validator cannot handle the input size.
   */
  MB_STATUS_TOO_LARGE = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  MB_STATUS_INTERNAL = 99,
} MbStatus;

/**
 * Records of one or more experiments.
 */
typedef struct MbRecords MbRecords;

/**
 * A generated or parsed network.
 */
typedef struct MbTopology MbTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *mb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mb_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mb_string_free(char *s);

/**
 * Generates a connected topology. `family` is `small_world`, `scale_free`
 * or `delaunay`; generator parameters use the suite defaults.
 *
 * # Safety
 * `family` must be a NUL-terminated string, `out` a valid pointer.
 */
enum MbStatus mb_topology_generate(const char *family,
                                   size_t n,
                                   uint64_t seed,
                                   struct MbTopology **out);

/**
 * Parses a topology in the text exchange format.
 *
 * # Safety
 * `text_in` must be a NUL-terminated string, `out` a valid pointer.
 */
enum MbStatus mb_topology_parse(const char *text_in, struct MbTopology **out);

/**
 * # Safety
 * `t` must come from this library and not have been freed. Null is ignored.
 */
void mb_topology_free(struct MbTopology *t);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t mb_topology_node_count(const struct MbTopology *t);

/**
 * Number of edges, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t mb_topology_edge_count(const struct MbTopology *t);

/**
 * Endpoints (`u < v`) of edge `index` in sorted edge order.
 *
 * # Safety
 * `t` must be a live handle; `u` and `v` valid pointers.
 */
enum MbStatus mb_topology_edge(const struct MbTopology *t, size_t index, size_t *u, size_t *v);

/**
 * Diameter and maximum degree.
 *
 * # Safety
 * `t` must be a live handle; out pointers valid.
 */
enum MbStatus mb_topology_metrics(const struct MbTopology *t, size_t *diameter, size_t *max_degree);

/**
 * Text exchange format of the topology; free with [`mb_string_free`].
 *
 * # Safety
 * `t` must be a live handle; `out` a valid pointer.
 */
enum MbStatus mb_topology_serialize(const struct MbTopology *t, char **out);

/**
 * Round budget for a task (`coloring`, `consensus`, `leader_election`,
 * `matching`, `vertex_cover`); `scaling` selects `2D + 1` for every task.
 *
 * # Safety
 * `t` must be a live handle, `task` a NUL-terminated string, `out` valid.
 */
enum MbStatus mb_round_budget(const struct MbTopology *t,
                              const char *task,
                              bool scaling,
                              size_t *out);

/**
 * Scores answers given as a JSON object mapping node index to answer text
 * (e.g. `{"0": "Group 1", "1": "Group 2"}`).
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum MbStatus mb_evaluate(const struct MbTopology *t,
                          const char *task,
                          const char *answers_json,
                          double *soft_score,
                          bool *solved);

/**
 * Brute-force validation of answers (same format as [`mb_evaluate`]);
 * returns `MB_STATUS_TOO_LARGE` beyond the validator's node limit.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum MbStatus mb_oracle_check(const struct MbTopology *t,
                              const char *task,
                              const char *answers_json,
                              bool *solved);

/**
 * Runs the scripted algorithm for `task` on the topology for `rounds`
 * rounds (0 selects the benchmark budget). Writes the scores and, when
 * `transcript` is non-null, the transcript as JSON lines.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated; `transcript` may be null.
 */
enum MbStatus mb_run_scripted(const struct MbTopology *t,
                              const char *task,
                              size_t rounds,
                              uint64_t seed,
                              double *soft_score,
                              bool *solved,
                              char **transcript);

/**
 * Runs the experiment described by a TOML configuration and returns its
 * records.
 *
 * # Safety
 * `config_toml` must be NUL-terminated; `out` valid.
 */
enum MbStatus mb_experiment_run(const char *config_toml, struct MbRecords **out);

/**
 * Loads a records file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` valid.
 */
enum MbStatus mb_records_load(const char *path, struct MbRecords **out);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t mb_records_len(const struct MbRecords *r);

/**
 * Number of solved runs, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t mb_records_solved(const struct MbRecords *r);

/**
 * # Safety
 * `r` must come from this library and not have been freed. Null is ignored.
 */
void mb_records_free(struct MbRecords *r);

/**
 * Renders the results table. `format` is `text`, `csv` or `markdown`;
 * `metric` is `solved` or `soft`.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum MbStatus mb_records_report(const struct MbRecords *r,
                                const char *format,
                                const char *metric,
                                bool allow_partial,
                                char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESHBENCH_H */
