#ifndef RTSCHED_RTSCHED_H
#define RTSCHED_RTSCHED_H

/*
 * C interface to the real-time scheduling simulator. All handles are opaque.
 * Functions return an rts_status; on failure rts_last_error() describes the
 * problem (per thread, valid until the next call on that thread).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(RTS_BUILDING_LIBRARY)
#define RTS_API __attribute__((visibility("default")))
#else
#define RTS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rts_status {
  RTS_OK = 0,
  RTS_ERR_INVALID_ARGUMENT = 1,
  RTS_ERR_GRAPH_TOO_LARGE = 2,
  RTS_ERR_SPEC_VIOLATION = 3,
  RTS_ERR_STATE_SPACE_TOO_LARGE = 4,
  RTS_ERR_SCHEDULE_INVALID = 5,
  RTS_ERR_NO_SCHEDULE = 6,
  RTS_ERR_ALL_WEIGHTS_ZERO = 7,
  RTS_ERR_NOT_COLLOCATED_UNIFORM = 8,
  RTS_ERR_ZERO_Q = 9,
  RTS_ERR_STATE_SPACE_EXCEEDED = 10,
  RTS_ERR_LOOKAHEAD_UNAVAILABLE = 11,
  RTS_ERR_CHAIN_INVALID = 12,
  RTS_ERR_POLICY_INCOMPATIBLE = 13,
  RTS_ERR_CONFIG = 14,
  RTS_ERR_IO = 15,
  RTS_ERR_BUFFER_TOO_SMALL = 16,
  RTS_ERR_INTERNAL = 99
} rts_status;

typedef struct rts_experiment rts_experiment;
typedef struct rts_graph rts_graph;

typedef struct rts_run_summary {
  int stable;
  uint64_t slots;
  /* Smallest per-link delivery ratio and largest per-link growth ratio. */
  double min_delivery_ratio;
  double max_growth_ratio;
  uint64_t max_frame_drop;
} rts_run_summary;

RTS_API const char* rts_version(void);
RTS_API const char* rts_last_error(void);
RTS_API const char* rts_status_name(int status);

RTS_API size_t rts_policy_count(void);
/* NULL when index is out of range. */
RTS_API const char* rts_policy_name(size_t index);

RTS_API int rts_experiment_load_file(const char* path, rts_experiment** out);
RTS_API int rts_experiment_load_string(const char* json, rts_experiment** out);
RTS_API void rts_experiment_free(rts_experiment* experiment);

RTS_API int rts_experiment_set_policy(rts_experiment* experiment, const char* name);
RTS_API int rts_experiment_set_seed(rts_experiment* experiment, uint64_t seed);
RTS_API int rts_experiment_set_horizon(rts_experiment* experiment, uint64_t horizon);
RTS_API int rts_experiment_set_scale(rts_experiment* experiment, double scale);
/* Non-zero: sweeps and comparisons print one progress line per probe to stderr. */
RTS_API int rts_experiment_set_verbose(rts_experiment* experiment, int verbose);
/* Replaces the policy list used by rts_compare; names separated by commas. */
RTS_API int rts_experiment_set_compare_policies(rts_experiment* experiment, const char* names);

/* Copies the resolved configuration as JSON into buf (NUL-terminated).
 * *needed receives the required size including the terminator. */
RTS_API int rts_experiment_config_json(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed);

/* Checks the traffic-fading chain. Returns RTS_OK when valid and
 * RTS_ERR_CHAIN_INVALID otherwise; the human-readable report goes to buf. */
RTS_API int rts_validate(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed);

/* One episode of the configured policy at the configured scale and seed.
 * out_dir may be NULL (no files); summary may be NULL. */
RTS_API int rts_run(rts_experiment* experiment, const char* out_dir, rts_run_summary* summary);

/* Stability frontier of the configured policy. */
RTS_API int rts_sweep(rts_experiment* experiment, const char* out_dir, double* p_hat);

/* Frontier of every policy in the compare list with shared seeds. */
RTS_API int rts_compare(rts_experiment* experiment, const char* out_dir);

/* CSV table of the last successful rts_sweep (frontier) or rts_compare
 * (comparison) on this handle, copied like rts_experiment_config_json. */
RTS_API int rts_experiment_last_table(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed);

RTS_API int rts_graph_create(int links, const int* edge_pairs, size_t edge_count, rts_graph** out);
RTS_API void rts_graph_free(rts_graph* graph);
/* Maximal independent sets as bitmasks (bit l = link l), canonical order.
 * *count receives the family size; at most cap sets are copied. */
RTS_API int rts_graph_mis(const rts_graph* graph, uint64_t* sets, size_t cap, size_t* count);

#ifdef __cplusplus
}
#endif

#endif
