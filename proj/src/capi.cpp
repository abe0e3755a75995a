#include "qcons/qcons.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qcons/analysis.hpp"
#include "qcons/error.hpp"
#include "qcons/experiments.hpp"
#include "qcons/io.hpp"

struct qc_graph {
  qcons::Graph g;
};

struct qc_weights {
  qcons::WeightMatrix w;
};

struct qc_trace {
  qcons::Trace trace;
  std::optional<qcons::LemmaReport> report;
  std::vector<qcons::IterationReport> rows;
  std::optional<qcons::Rational> alpha_max;
  std::optional<qcons::State> frame_x0;
};

namespace {

thread_local std::string g_last_error;

qc_status to_status(qcons::ErrorCode c) { return static_cast<qc_status>(static_cast<int>(c)); }

template <typename Fn>
qc_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return QC_OK;
  } catch (const qcons::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return QC_PARSE_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QC_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return QC_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw qcons::Error(qcons::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qcons::Rational rational(const char* text, const char* what) {
  require(text, what);
  return qcons::Rational::parse(text);
}

std::string join(std::span<const qcons::Rational> x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ',';
    s += x[i].str();
  }
  return s;
}

qcons::State parse_state(const char* csv) {
  require(csv, "x0");
  qcons::State x;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw qcons::Error(qcons::ErrorCode::ParseError, "empty entry in state list");
    x.push_back(qcons::Rational::parse(item.substr(b, e - b + 1)));
  }
  if (x.empty()) throw qcons::Error(qcons::ErrorCode::ParseError, "empty state list");
  return x;
}

qcons::QuantizerKind quantizer_kind(const char* name, const char* step) {
  qcons::QuantizerKind q;
  if (name != nullptr) q.variant = qcons::parse_quantizer_variant(name);
  if (step != nullptr) q.step = qcons::Rational::parse(step);
  if (q.step.sign() <= 0) throw qcons::Error(qcons::ErrorCode::ParameterOutOfRange, "step must be positive");
  return q;
}

template <typename Make>
qc_status make_graph(qc_graph** out, Make&& make) {
  return guarded([&] {
    require(out, "out");
    *out = new qc_graph{make()};
  });
}

template <typename Make>
qc_status make_weights(qc_weights** out, Make&& make) {
  return guarded([&] {
    require(out, "out");
    *out = new qc_weights{make()};
  });
}

std::ofstream open_out(const char* path) {
  require(path, "path");
  std::ofstream os(path);
  if (!os) throw qcons::Error(qcons::ErrorCode::IoError, std::string("cannot write ") + path);
  return os;
}

nlohmann::json report_json(const qcons::LemmaReport& r) {
  nlohmann::json j;
  j["applicable"] = r.applicable;
  if (!r.applicable) {
    j["reason"] = r.reason;
    return j;
  }
  j["ok"] = r.ok();
  j["iterations"] = r.iterations;
  j["s1_count"] = r.s1_count;
  j["s2_count"] = r.s2_count;
  j["s3_count"] = r.s3_count;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back({{"check", v.check}, {"k", v.k}, {"node", v.node}, {"detail", v.detail}});
  }
  j["bounds_evaluated"] = r.bounds_evaluated;
  if (r.bounds_evaluated) {
    j["wait_bound"] = r.wait_bound.str();
    j["wait_samples"] = r.wait_samples;
    j["max_wait"] = r.max_wait;
    j["exit_samples"] = r.exit_samples;
    j["max_exit"] = r.max_exit;
  }
  return j;
}

nlohmann::json trace_summary(const qcons::Trace& t, const std::optional<qcons::LemmaReport>& report,
                             const std::optional<qcons::Rational>& alpha_max,
                             const std::optional<qcons::State>& frame_x0) {
  nlohmann::json j;
  j["verdict"] = qcons::verdict_to_json(t.verdict);
  j["last_k"] = t.last_k;
  j["assumption_satisfied"] = t.assumption_satisfied;
  j["x_ave"] = qcons::state_average(t.initial).str();
  if (report) j["monitor"] = report_json(*report);
  if (qcons::is_decided(t.verdict)) {
    const auto d = qcons::d_infinity(t);
    j["d_inf_squared"] = d.squared.str();
    j["d_inf"] = d.decimal;
    if (d.exact) j["d_inf_exact"] = d.exact->str();
    j["terminal_deviation"] = qcons::terminal_deviation(t).str();
    j["running_average_limit"] = join(qcons::running_average(t).limit);
  }
  if (alpha_max && frame_x0) {
    j["alpha_max"] = alpha_max->str();
    j["certificate"] = qcons::consensus_certificate(*frame_x0, *alpha_max);
  }
  return j;
}

}  // namespace

extern "C" {

const char* qc_version(void) { return "1.0.0"; }

const char* qc_status_string(qc_status s) {
  if (s == QC_OK) return "ok";
  if (s == QC_INTERNAL) return "internal error";
  if (s >= QC_INVALID_ARGUMENT && s <= QC_NOT_CONVERGED) return qcons::to_string(static_cast<qcons::ErrorCode>(s));
  return "unknown status";
}

const char* qc_last_error(void) { return g_last_error.c_str(); }

void qc_string_free(char* s) { std::free(s); }

qc_status qc_graph_from_edges(int n, const int* edges, size_t m, qc_graph** out) {
  return make_graph(out, [&] {
    if (m > 0) require(edges, "edges");
    std::vector<std::pair<qcons::NodeId, qcons::NodeId>> list;
    for (size_t e = 0; e < m; ++e) list.emplace_back(edges[2 * e], edges[2 * e + 1]);
    return qcons::Graph::from_edges(n, list);
  });
}

qc_status qc_graph_erdos_renyi(int n, double p, uint64_t seed, qc_graph** out) {
  return make_graph(out, [&] { return qcons::erdos_renyi(n, p, seed); });
}

qc_status qc_graph_geometric(int n, double c, uint64_t seed, qc_graph** out) {
  return make_graph(out, [&] { return qcons::random_geometric(n, c, seed).first; });
}

qc_status qc_graph_geometric_radius(int n, double radius, uint64_t seed, qc_graph** out) {
  return make_graph(out, [&] { return qcons::random_geometric_radius(n, radius, seed).first; });
}

qc_status qc_graph_path(int n, qc_graph** out) {
  return make_graph(out, [&] { return qcons::path_graph(n); });
}

qc_status qc_graph_complete(int n, qc_graph** out) {
  return make_graph(out, [&] { return qcons::complete_graph(n); });
}

qc_status qc_graph_bipartite(int left, int right, qc_graph** out) {
  return make_graph(out, [&] { return qcons::complete_bipartite_regular(left, right); });
}

qc_status qc_graph_read(const char* path, qc_graph** out) {
  return make_graph(out, [&] {
    require(path, "path");
    std::ifstream in(path);
    if (!in) throw qcons::Error(qcons::ErrorCode::IoError, std::string("cannot open ") + path);
    return qcons::read_edge_list(in);
  });
}

qc_status qc_graph_write(const qc_graph* g, const char* path) {
  return guarded([&] {
    require(g, "graph");
    auto os = open_out(path);
    qcons::write_edge_list(os, g->g);
  });
}

int qc_graph_size(const qc_graph* g) { return g ? g->g.size() : 0; }

size_t qc_graph_edge_count(const qc_graph* g) { return g ? g->g.edges().size() : 0; }

qc_status qc_graph_edge(const qc_graph* g, size_t index, int* u, int* v) {
  return guarded([&] {
    require(g, "graph");
    require(u, "u");
    require(v, "v");
    if (index >= g->g.edges().size()) throw qcons::Error(qcons::ErrorCode::InvalidArgument, "edge index out of range");
    *u = g->g.edges()[index].u;
    *v = g->g.edges()[index].v;
  });
}

void qc_graph_free(qc_graph* g) { delete g; }

qc_status qc_weights_metropolis(const qc_graph* g, qc_weights** out) {
  return make_weights(out, [&] {
    require(g, "graph");
    return qcons::metropolis(g->g);
  });
}

qc_status qc_weights_modified(const qc_graph* g, const char* C, qc_weights** out) {
  return make_weights(out, [&] {
    require(g, "graph");
    return qcons::modified_metropolis(g->g, rational(C, "C"));
  });
}

qc_status qc_weights_two_node(const char* w, qc_weights** out) {
  return make_weights(out, [&] { return qcons::two_node_cyclic(rational(w, "w")); });
}

qc_status qc_weights_uniform(const qc_graph* g, const char* w, qc_weights** out) {
  return make_weights(out, [&] {
    require(g, "graph");
    return qcons::uniform_self_weight(g->g, rational(w, "w"));
  });
}

qc_status qc_weights_read(const char* path, qc_weights** out) {
  return make_weights(out, [&] {
    require(path, "path");
    std::ifstream in(path);
    if (!in) throw qcons::Error(qcons::ErrorCode::IoError, std::string("cannot open ") + path);
    return qcons::read_weights(in);
  });
}

qc_status qc_weights_write(const qc_weights* w, const char* path) {
  return guarded([&] {
    require(w, "weights");
    auto os = open_out(path);
    qcons::write_weights(os, w->w);
  });
}

qc_status qc_weights_entry(const qc_weights* w, int i, int j, char** value) {
  return guarded([&] {
    require(w, "weights");
    require(value, "value");
    if (i < 0 || j < 0 || i >= w->w.size() || j >= w->w.size()) {
      throw qcons::Error(qcons::ErrorCode::InvalidArgument, "entry index out of range");
    }
    *value = dup(w->w.at(i, j).str());
  });
}

qc_status qc_weights_validate(const qc_weights* w, const qc_graph* g, int* satisfied, char** report) {
  return guarded([&] {
    require(w, "weights");
    require(g, "graph");
    require(satisfied, "satisfied");
    const auto r = qcons::validate_assumption1(w->w, g->g);
    *satisfied = r.satisfied() ? 1 : 0;
    if (report) *report = r.satisfied() ? nullptr : dup(r.summary());
  });
}

void qc_weights_free(qc_weights* w) { delete w; }

qc_status qc_initial_state(int n, const char* recipe, const char* lo, const char* hi, int64_t denominator,
                           const char* fraction, uint64_t seed, char** x0_csv) {
  return guarded([&] {
    require(x0_csv, "x0_csv");
    qcons::ExperimentConfig cfg;
    cfg.graph = qcons::GraphFamily::Path;
    cfg.n = n;
    if (recipe != nullptr) qcons::apply_setting(cfg, "init", recipe);
    if (cfg.init == qcons::InitRecipe::Explicit) {
      throw qcons::Error(qcons::ErrorCode::InvalidArgument, "recipe must be uniform or forced");
    }
    if (lo != nullptr) cfg.lo = qcons::Rational::parse(lo);
    if (hi != nullptr) cfg.hi = qcons::Rational::parse(hi);
    if (denominator > 0) cfg.denominator = denominator;
    if (fraction != nullptr) cfg.fraction = qcons::Rational::parse(fraction);
    qcons::validate(cfg);
    *x0_csv = dup(join(qcons::make_initial_state(cfg, seed)));
  });
}

void qc_sim_options_default(qc_sim_options* o) {
  if (o == nullptr) return;
  o->quantizer = "trunc";
  o->step = "1";
  o->seed = 0;
  o->max_iters = qcons::kDefaultMaxIters;
  o->force = 0;
  o->record_stride = 1;
  o->monitor = 1;
}

qc_status qc_simulate(const qc_graph* g, const qc_weights* w, const char* x0_csv, const qc_sim_options* o,
                      qc_trace** out) {
  return guarded([&] {
    require(g, "graph");
    require(w, "weights");
    require(out, "out");
    qc_sim_options opts;
    qc_sim_options_default(&opts);
    if (o != nullptr) opts = *o;
    qcons::QuantizerKind q = quantizer_kind(opts.quantizer, opts.step);
    q.seed = opts.seed;
    qcons::State x0 = parse_state(x0_csv);

    qcons::SimOptions sim;
    sim.max_iters = opts.max_iters;
    sim.force = opts.force != 0;
    sim.record = opts.record_stride == 0   ? qcons::RecordPolicy::none()
                 : opts.record_stride == 1 ? qcons::RecordPolicy::full()
                                           : qcons::RecordPolicy::every(opts.record_stride);
    auto t = std::make_unique<qc_trace>();
    if (opts.monitor) {
      qcons::MonitoredRun mr = qcons::simulate_monitored(g->g, w->w, q, x0, sim);
      t->trace = std::move(mr.trace);
      t->report = std::move(mr.report);
      t->rows = std::move(mr.iterations);
      if (mr.constants) t->alpha_max = mr.constants->alpha_max();
    } else {
      t->trace = qcons::simulate(g->g, w->w, q, x0, sim);
    }
    if (t->alpha_max) t->frame_x0 = qcons::truncation_frame(q).to_frame(x0);
    *out = t.release();
  });
}

qc_status qc_trace_verdict_json(const qc_trace* t, char** json) {
  return guarded([&] {
    require(t, "trace");
    require(json, "json");
    *json = dup(qcons::verdict_to_json(t->trace.verdict).dump());
  });
}

size_t qc_trace_recorded(const qc_trace* t) { return t ? t->trace.states.size() : 0; }

uint64_t qc_trace_last_k(const qc_trace* t) { return t ? t->trace.last_k : 0; }

qc_status qc_trace_state(const qc_trace* t, size_t index, uint64_t* k, char** x_csv) {
  return guarded([&] {
    require(t, "trace");
    require(x_csv, "x_csv");
    if (index >= t->trace.states.size()) throw qcons::Error(qcons::ErrorCode::InvalidArgument, "state index out of range");
    if (k) *k = t->trace.states[index].k;
    *x_csv = dup(join(t->trace.states[index].x));
  });
}

qc_status qc_trace_write_csv(const qc_trace* t, const char* path) {
  return guarded([&] {
    require(t, "trace");
    auto os = open_out(path);
    qcons::write_trace_csv(os, t->trace.states);
  });
}

qc_status qc_trace_write_instrumentation(const qc_trace* t, const char* path) {
  return guarded([&] {
    require(t, "trace");
    if (t->rows.empty()) throw qcons::Error(qcons::ErrorCode::InvalidArgument, "the run was not monitored");
    auto os = open_out(path);
    qcons::write_instrumentation_csv(os, t->rows);
  });
}

qc_status qc_trace_report_json(const qc_trace* t, char** json) {
  return guarded([&] {
    require(t, "trace");
    require(json, "json");
    *json = dup(trace_summary(t->trace, t->report, t->alpha_max, t->frame_x0).dump(2));
  });
}

qc_status qc_trace_lemmas_ok(const qc_trace* t, int* ok) {
  return guarded([&] {
    require(t, "trace");
    require(ok, "ok");
    *ok = t->report && t->report->ok() ? 1 : 0;
  });
}

qc_status qc_trace_d_infinity(const qc_trace* t, char** squared, char** decimal) {
  return guarded([&] {
    require(t, "trace");
    const auto d = qcons::d_infinity(t->trace);
    if (squared) *squared = dup(d.squared.str());
    if (decimal) *decimal = dup(d.decimal);
  });
}

void qc_trace_free(qc_trace* t) { delete t; }

qc_status qc_analyze_trace_file(const char* trace_path, const qc_graph* g, const qc_weights* w, const char* quantizer,
                                const char* step, const char* instrumentation_path, char** report_json) {
  return guarded([&] {
    require(trace_path, "trace_path");
    require(g, "graph");
    require(w, "weights");
    require(report_json, "report_json");
    std::ifstream in(trace_path);
    if (!in) throw qcons::Error(qcons::ErrorCode::IoError, std::string("cannot open ") + trace_path);
    const qcons::QuantizerKind q = quantizer_kind(quantizer, step);
    if (!q.deterministic()) {
      throw qcons::Error(qcons::ErrorCode::UnsupportedReduction, "replay needs a deterministic quantizer");
    }
    qcons::Trace t = qcons::trace_from_states(qcons::read_trace_csv(in), q);
    if (static_cast<int>(t.initial.size()) != g->g.size()) {
      throw qcons::Error(qcons::ErrorCode::InvalidArgument, "trace and graph sizes differ");
    }
    t.assumption_satisfied = qcons::validate_assumption1(w->w, g->g).satisfied();

    std::optional<qcons::LemmaReport> report;
    std::optional<qcons::Rational> alpha_max;
    std::optional<qcons::State> frame_x0;
    std::vector<qcons::IterationReport> rows;
    if (!t.assumption_satisfied) {
      report = qcons::check_lemmas(t, g->g, w->w);
    } else {
      const auto frame = qcons::truncation_frame(q);
      frame_x0 = frame.to_frame(t.initial);
      const auto constants = qcons::compute_grid_constants(w->w, *frame_x0);
      alpha_max = constants.alpha_max();
      qcons::LyapunovMonitor monitor(g->g, w->w, constants);
      for (const auto& s : t.states) monitor.observe(s.k, frame.to_frame(s.x));
      monitor.finish(t.verdict);
      report = monitor.report();
      rows = monitor.iterations();
    }
    if (instrumentation_path != nullptr) {
      auto os = open_out(instrumentation_path);
      qcons::write_instrumentation_csv(os, rows);
    }
    *report_json = dup(trace_summary(t, report, alpha_max, frame_x0).dump(2));
  });
}

const char* qc_config_help(void) {
  static const std::string help = qcons::config_help();
  return help.c_str();
}

qc_status qc_experiment_run(const char* config_path, const char* const* overrides, size_t override_count,
                            char** summary_json) {
  return guarded([&] {
    require(summary_json, "summary_json");
    qcons::ExperimentConfig cfg = config_path ? qcons::load_config(config_path) : qcons::ExperimentConfig{};
    for (size_t i = 0; i < override_count; ++i) {
      require(overrides[i], "override");
      const std::string kv(overrides[i]);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw qcons::Error(qcons::ErrorCode::ParseError, "override '" + kv + "' is not key=value");
      qcons::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    const qcons::SweepResult r = qcons::run_experiment(cfg);
    nlohmann::json j;
    j["sweep_key"] = cfg.sweep_key;
    j["runs_per_cell"] = cfg.runs;
    if (!cfg.output.empty()) j["output"] = cfg.output;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : r.cells) {
      nlohmann::json cj{{"value", c.value},         {"runs", c.runs},           {"completed", c.completed},
                        {"consensus", c.consensus}, {"cycle", c.cycle},         {"undecided", c.undecided},
                        {"failed", c.failed},       {"mean_t_conv", c.mean_t_conv.str()},
                        {"mean_t_conv_decimal", c.mean_t_conv.to_double()}, {"mean_d_inf", c.mean_d_inf},
                        {"max_deviation", c.max_deviation.str()},           {"violations", c.violations},
                        {"within_bound", c.within_bound}};
      if (c.deviation_bound) cj["deviation_bound"] = c.deviation_bound->str();
      j["cells"].push_back(std::move(cj));
    }
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& run : r.runs) {
      if (!run.error.empty()) errors.push_back({{"cell", run.cell}, {"seed", run.seed}, {"error", run.error}});
    }
    if (!errors.empty()) j["errors"] = std::move(errors);
    *summary_json = dup(j.dump(2));
  });
}

qc_status qc_verify(int n, int runs, uint64_t seed, int threads, int* ok, char** report_json) {
  return guarded([&] {
    require(ok, "ok");
    const qcons::VerifyReport r = qcons::verify_invariants(n, runs, seed, threads);
    *ok = r.ok() ? 1 : 0;
    if (report_json) {
      nlohmann::json j{{"n", n}, {"runs", r.runs}, {"seed", seed}, {"consensus", r.consensus}, {"cycle", r.cycle},
                       {"ok", r.ok()}, {"failures", r.failures}};
      *report_json = dup(j.dump(2));
    }
  });
}

}  // extern "C"
