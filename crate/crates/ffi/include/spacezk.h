#ifndef SPACEZK_H
#define SPACEZK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Prover played against the honest verifier in [`szk_session_run`].
 */
typedef enum SzkProver {
  /**
   * Needs a graph with a known Hamiltonian cycle.
   */
  SZK_PROVER_HONEST = 0,
  SZK_PROVER_GUESSING = 1,
  SZK_PROVER_MAULING = 2,
} SzkProver;

/**
 * Result of every fallible call. Zero is success.
 */
typedef enum SzkStatus {
  SZK_STATUS_OK = 0,
  SZK_STATUS_NULL_POINTER = 1,
  SZK_STATUS_INVALID_UTF8 = 2,
  SZK_STATUS_INVALID_ARGUMENT = 3,
  SZK_STATUS_CONFIG = 4,
  SZK_STATUS_PROTOCOL = 5,
  SZK_STATUS_SIMULATION = 6,
  SZK_STATUS_QUANTUM = 7,
  SZK_STATUS_STATISTICS = 8,
  SZK_STATUS_IO = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  SZK_STATUS_PANIC = 10,
} SzkStatus;

/**
 * A graph, with its Hamiltonian cycle when one is known.
 */
typedef struct SzkGraph SzkGraph;

typedef struct SzkReport SzkReport;

typedef struct SzkTranscript SzkTranscript;

/**
 * Flattened verdict: `kind` is 0 accept, 1 reject, 2 abort; `step` is the
 * protocol step for reject and abort, 0 for accept.
 */
typedef struct SzkVerdict {
  uint8_t kind;
  uint8_t step;
} SzkVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *szk_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *szk_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void szk_string_free(char *s);

/**
 * The Petersen graph: ten vertices, no Hamiltonian cycle.
 *
 * # Safety
 * `out_graph` must be a valid pointer.
 */
enum SzkStatus szk_graph_petersen(struct SzkGraph **out_graph);

/**
 * A random graph on `n` vertices with a planted Hamiltonian cycle and each
 * other edge present with probability `density`.
 *
 * # Safety
 * `out_graph` must be a valid pointer.
 */
enum SzkStatus szk_graph_random_hamiltonian(size_t n,
                                            double density,
                                            uint64_t seed,
                                            struct SzkGraph **out_graph);

/**
 * Vertex count, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t szk_graph_vertex_count(const struct SzkGraph *graph);

/**
 * # Safety
 * `graph` must be NULL or a live handle, and is dangling afterwards.
 */
void szk_graph_free(struct SzkGraph *graph);

/**
 * One session of `prover` against the honest verifier on `graph`.
 *
 * # Safety
 * `graph` must be a live handle and `out_transcript` a valid pointer.
 */
enum SzkStatus szk_session_run(const struct SzkGraph *graph,
                               enum SzkProver prover,
                               size_t lambda,
                               uint32_t t,
                               uint64_t seed,
                               struct SzkTranscript **out_transcript);

/**
 * Simulated view of the named zoo verifier (`honest`, `always-abort`,
 * `never-abort`, `bit-conditional`, `quantum-coin`, `delayed-abort`) with
 * a `width`-qubit register.
 *
 * # Safety
 * `graph` must be a live handle, `verifier` a NUL-terminated string and
 * `out_transcript` a valid pointer.
 */
enum SzkStatus szk_simulate(const struct SzkGraph *graph,
                            const char *verifier,
                            size_t width,
                            size_t lambda,
                            uint32_t t,
                            uint64_t seed,
                            struct SzkTranscript **out_transcript);

/**
 * # Safety
 * `transcript` must be a live handle and `out_verdict` a valid pointer.
 */
enum SzkStatus szk_transcript_verdict(const struct SzkTranscript *transcript,
                                      struct SzkVerdict *out_verdict);

/**
 * Number of messages, or 0 for NULL.
 *
 * # Safety
 * `transcript` must be NULL or a live handle.
 */
size_t szk_transcript_message_count(const struct SzkTranscript *transcript);

/**
 * Peak simulator qubits; 0 for real sessions and NULL.
 *
 * # Safety
 * `transcript` must be NULL or a live handle.
 */
size_t szk_transcript_peak_qubits(const struct SzkTranscript *transcript);

/**
 * Re-runs the honest verifier over the transcript and writes 1 when its
 * verdict matches the recorded one.
 *
 * # Safety
 * Both handles must be live and `out_matches` a valid pointer.
 */
enum SzkStatus szk_transcript_replay(const struct SzkTranscript *transcript,
                                     const struct SzkGraph *graph,
                                     size_t lambda,
                                     uint32_t t,
                                     uint8_t *out_matches);

/**
 * JSON form of the transcript; free with [`szk_string_free`].
 *
 * # Safety
 * `transcript` must be a live handle and `out_json` a valid pointer.
 */
enum SzkStatus szk_transcript_to_json(const struct SzkTranscript *transcript, char **out_json);

/**
 * # Safety
 * `transcript` must be NULL or a live handle, and is dangling afterwards.
 */
void szk_transcript_free(struct SzkTranscript *transcript);

/**
 * Runs a named harness experiment at its defaults.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out_report` a valid pointer.
 */
enum SzkStatus szk_experiment_run(const char *name, uint64_t seed, struct SzkReport **out_report);

/**
 * 1 when every metric passed, 0 otherwise or for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
uint8_t szk_report_passed(const struct SzkReport *report);

/**
 * Value of the named metric.
 *
 * # Safety
 * `report` must be a live handle, `metric` a NUL-terminated string and
 * `out_value` a valid pointer.
 */
enum SzkStatus szk_report_metric(const struct SzkReport *report,
                                 const char *metric,
                                 double *out_value);

/**
 * Seed-determined JSON form of the report (no wall-clock fields); free
 * with [`szk_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out_json` a valid pointer.
 */
enum SzkStatus szk_report_to_json(const struct SzkReport *report, char **out_json);

/**
 * # Safety
 * `report` must be NULL or a live handle, and is dangling afterwards.
 */
void szk_report_free(struct SzkReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPACEZK_H */
