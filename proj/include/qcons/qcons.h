/* C interface to the quantized-consensus library.
 *
 * Objects are opaque handles released with their *_free function. Every
 * function that can fail returns a qc_status; on failure qc_last_error()
 * describes the problem (thread-local, valid until the next call on the same
 * thread). Rationals cross the boundary as strings: "p/q", an integer, or a
 * finite decimal on input; "p/q" or an integer on output. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * qc_string_free().
 */
#ifndef QCONS_H
#define QCONS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QC_API __declspec(dllexport)
#else
#define QC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qc_status {
  QC_OK = 0,
  QC_INVALID_ARGUMENT = 1,
  QC_PARSE_ERROR = 2,
  QC_IO_ERROR = 3,
  QC_EMPTY_NEIGHBORHOOD = 4,
  QC_ASSUMPTION_VIOLATED = 5,
  QC_CONNECTIVITY_FAILURE = 6,
  QC_PARAMETER_OUT_OF_RANGE = 7,
  QC_UNSUPPORTED_REDUCTION = 8,
  QC_INTERNAL_INCONSISTENCY = 9,
  QC_NOT_CONVERGED = 10,
  QC_INTERNAL = 99
} qc_status;

typedef struct qc_graph qc_graph;
typedef struct qc_weights qc_weights;
typedef struct qc_trace qc_trace;

QC_API const char* qc_version(void);
QC_API const char* qc_status_string(qc_status s);
QC_API const char* qc_last_error(void);
QC_API void qc_string_free(char* s);

/* Graphs ---------------------------------------------------------------- */

/* edges holds m (u, v) pairs, 2*m ints. */
QC_API qc_status qc_graph_from_edges(int n, const int* edges, size_t m, qc_graph** out);
QC_API qc_status qc_graph_erdos_renyi(int n, double p, uint64_t seed, qc_graph** out);
/* radius = sqrt(c ln n / n) */
QC_API qc_status qc_graph_geometric(int n, double c, uint64_t seed, qc_graph** out);
QC_API qc_status qc_graph_geometric_radius(int n, double radius, uint64_t seed, qc_graph** out);
QC_API qc_status qc_graph_path(int n, qc_graph** out);
QC_API qc_status qc_graph_complete(int n, qc_graph** out);
QC_API qc_status qc_graph_bipartite(int left, int right, qc_graph** out);
QC_API qc_status qc_graph_read(const char* path, qc_graph** out);
QC_API qc_status qc_graph_write(const qc_graph* g, const char* path);
QC_API int qc_graph_size(const qc_graph* g);
QC_API size_t qc_graph_edge_count(const qc_graph* g);
QC_API qc_status qc_graph_edge(const qc_graph* g, size_t index, int* u, int* v);
QC_API void qc_graph_free(qc_graph* g);

/* Weights --------------------------------------------------------------- */

QC_API qc_status qc_weights_metropolis(const qc_graph* g, qc_weights** out);
QC_API qc_status qc_weights_modified(const qc_graph* g, const char* C, qc_weights** out);
QC_API qc_status qc_weights_two_node(const char* w, qc_weights** out);
QC_API qc_status qc_weights_uniform(const qc_graph* g, const char* w, qc_weights** out);
QC_API qc_status qc_weights_read(const char* path, qc_weights** out);
QC_API qc_status qc_weights_write(const qc_weights* w, const char* path);
/* Entry (i, j) as a rational string. */
QC_API qc_status qc_weights_entry(const qc_weights* w, int i, int j, char** value);
/* *satisfied is 1 when every rule holds; *report lists the violations (NULL when none). */
QC_API qc_status qc_weights_validate(const qc_weights* w, const qc_graph* g, int* satisfied, char** report);
QC_API void qc_weights_free(qc_weights* w);

/* Initial states ---------------------------------------------------------- */

/* recipe "uniform" or "forced"; values are multiples of 1/denominator in
 * [lo, hi]; "forced" sets the last value so frac(average) = fraction.
 * Output is a comma-separated list of rationals. */
QC_API qc_status qc_initial_state(int n, const char* recipe, const char* lo, const char* hi, int64_t denominator,
                                  const char* fraction, uint64_t seed, char** x0_csv);

/* Simulation -------------------------------------------------------------- */

typedef struct qc_sim_options {
  const char* quantizer;  /* trunc | ceil | round | prob; NULL = trunc */
  const char* step;       /* NULL = 1 */
  uint64_t seed;          /* probabilistic quantizer stream */
  uint64_t max_iters;
  int force;              /* run even if the weights fail the assumption check */
  uint64_t record_stride; /* 1 = every state, k = every k-th, 0 = none */
  int monitor;            /* attach the Lyapunov monitor */
} qc_sim_options;

QC_API void qc_sim_options_default(qc_sim_options* o);

/* x0_csv: comma-separated rationals. QC_ASSUMPTION_VIOLATED (with the
 * violation list in qc_last_error) when the weights fail and force is 0. */
QC_API qc_status qc_simulate(const qc_graph* g, const qc_weights* w, const char* x0_csv, const qc_sim_options* o,
                             qc_trace** out);

/* {"kind": ..., "k0"/"t_conv": ..., "level"/"period": ...} */
QC_API qc_status qc_trace_verdict_json(const qc_trace* t, char** json);
QC_API size_t qc_trace_recorded(const qc_trace* t);
QC_API uint64_t qc_trace_last_k(const qc_trace* t);
/* Recorded state number `index` as comma-separated rationals, and its iteration. */
QC_API qc_status qc_trace_state(const qc_trace* t, size_t index, uint64_t* k, char** x_csv);
QC_API qc_status qc_trace_write_csv(const qc_trace* t, const char* path);
/* Per-iteration monitor rows; QC_INVALID_ARGUMENT when the run was not monitored. */
QC_API qc_status qc_trace_write_instrumentation(const qc_trace* t, const char* path);
/* Monitor report, d_inf, running-average limit and certificate as JSON. */
QC_API qc_status qc_trace_report_json(const qc_trace* t, char** json);
/* *ok = 1 when the monitor ran and found no violation. */
QC_API qc_status qc_trace_lemmas_ok(const qc_trace* t, int* ok);
QC_API qc_status qc_trace_d_infinity(const qc_trace* t, char** squared, char** decimal);
QC_API void qc_trace_free(qc_trace* t);

/* Replays a trace CSV (k,i,x_num,x_den,floor_x) through the monitors. The
 * quantizer names the system that produced the trace. Writes per-iteration
 * rows to instrumentation_path when it is not NULL. */
QC_API qc_status qc_analyze_trace_file(const char* trace_path, const qc_graph* g, const qc_weights* w,
                                       const char* quantizer, const char* step, const char* instrumentation_path,
                                       char** report_json);

/* Experiments ------------------------------------------------------------- */

QC_API const char* qc_config_help(void);

/* Loads a key = value config (path may be NULL for defaults), applies the
 * "key=value" overrides in order, runs it and returns the sweep summary. */
QC_API qc_status qc_experiment_run(const char* config_path, const char* const* overrides, size_t override_count,
                                   char** summary_json);

/* Seeded invariant suite; *ok = 1 when every check passed. */
QC_API qc_status qc_verify(int n, int runs, uint64_t seed, int threads, int* ok, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* QCONS_H */
