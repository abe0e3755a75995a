#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qcons/qcons.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: %s failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

int main(void) {
  qc_graph* g = NULL;
  qc_weights* w = NULL;
  qc_trace* t = NULL;
  char* s = NULL;

  EXPECT(qc_graph_path(3, &g) == QC_OK);
  EXPECT(qc_graph_size(g) == 3);
  EXPECT(qc_graph_edge_count(g) == 2);
  EXPECT(qc_weights_modified(g, "2", &w) == QC_OK);
  EXPECT(qc_weights_entry(w, 0, 1, &s) == QC_OK);
  EXPECT(s && strcmp(s, "1/6") == 0);
  qc_string_free(s);

  qc_sim_options o;
  qc_sim_options_default(&o);
  EXPECT(qc_simulate(g, w, "0,1,2", &o, &t) == QC_OK);
  EXPECT(qc_trace_verdict_json(t, &s) == QC_OK);
  EXPECT(s && strstr(s, "QuantizedConsensus") != NULL);
  qc_string_free(s);
  EXPECT(qc_trace_recorded(t) == qc_trace_last_k(t) + 1);
  uint64_t k = 99;
  EXPECT(qc_trace_state(t, 1, &k, &s) == QC_OK);
  EXPECT(k == 1);
  EXPECT(s && strcmp(s, "1/6,1,11/6") == 0);
  qc_string_free(s);
  int ok = 0;
  EXPECT(qc_trace_lemmas_ok(t, &ok) == QC_OK);
  EXPECT(ok == 1);
  EXPECT(qc_trace_report_json(t, &s) == QC_OK);
  EXPECT(s && strstr(s, "\"monitor\"") != NULL);
  qc_string_free(s);
  qc_trace_free(t);
  t = NULL;

  /* Two-node design: refused unless forced, then d_inf = 5/2. */
  qc_graph* k2 = NULL;
  qc_weights* bad = NULL;
  EXPECT(qc_graph_path(2, &k2) == QC_OK);
  EXPECT(qc_weights_two_node("1/25", &bad) == QC_OK);
  int satisfied = 1;
  EXPECT(qc_weights_validate(bad, k2, &satisfied, &s) == QC_OK);
  EXPECT(satisfied == 0);
  EXPECT(s && strstr(s, "DominantDiagonal") != NULL);
  qc_string_free(s);
  EXPECT(qc_simulate(k2, bad, "3/10,53/10", &o, &t) == QC_ASSUMPTION_VIOLATED);
  EXPECT(t == NULL);
  EXPECT(strstr(qc_last_error(), "DominantDiagonal") != NULL);
  o.force = 1;
  EXPECT(qc_simulate(k2, bad, "3/10,53/10", &o, &t) == QC_OK);
  char* sq = NULL;
  char* dec = NULL;
  EXPECT(qc_trace_d_infinity(t, &sq, &dec) == QC_OK);
  EXPECT(sq && strcmp(sq, "25/4") == 0);
  EXPECT(dec && strcmp(dec, "2.5") == 0);
  qc_string_free(sq);
  qc_string_free(dec);
  qc_trace_free(t);

  /* Error paths. */
  qc_graph* none = NULL;
  EXPECT(qc_graph_path(1, &none) == QC_INVALID_ARGUMENT);
  EXPECT(none == NULL);
  EXPECT(qc_weights_modified(g, "3/2", &bad) == QC_PARAMETER_OUT_OF_RANGE);
  EXPECT(qc_simulate(g, w, "0,1", &o, &t) == QC_INVALID_ARGUMENT);
  EXPECT(qc_simulate(g, w, "0,x,1", &o, &t) == QC_PARSE_ERROR);
  EXPECT(qc_graph_read("/nonexistent/graph.txt", &none) == QC_IO_ERROR);
  EXPECT(strcmp(qc_status_string(QC_NOT_CONVERGED), "NotConverged") == 0);

  char* x0 = NULL;
  EXPECT(qc_initial_state(4, "forced", "0", "10", 10, "1/2", 5, &x0) == QC_OK);
  EXPECT(x0 != NULL);
  qc_string_free(x0);

  int vok = 0;
  EXPECT(qc_verify(6, 4, 1, 1, &vok, &s) == QC_OK);
  EXPECT(vok == 1);
  qc_string_free(s);

  qc_weights_free(bad);
  qc_graph_free(k2);
  qc_weights_free(w);
  qc_graph_free(g);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("C API: all checks passed\n");
  return failures ? 1 : 0;
}
