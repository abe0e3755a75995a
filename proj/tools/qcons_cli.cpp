// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcons/qcons.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kViolation = 2, kRuntime = 3 };

struct Failure {
  int code;
  std::string message;
};

struct GraphDeleter {
  void operator()(qc_graph* g) const { qc_graph_free(g); }
};
struct WeightsDeleter {
  void operator()(qc_weights* w) const { qc_weights_free(w); }
};
struct TraceDeleter {
  void operator()(qc_trace* t) const { qc_trace_free(t); }
};
struct StringDeleter {
  void operator()(char* s) const { qc_string_free(s); }
};
using GraphPtr = std::unique_ptr<qc_graph, GraphDeleter>;
using WeightsPtr = std::unique_ptr<qc_weights, WeightsDeleter>;
using TracePtr = std::unique_ptr<qc_trace, TraceDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

int exit_for(qc_status s) {
  switch (s) {
    case QC_OK: return kOk;
    case QC_INVALID_ARGUMENT:
    case QC_PARSE_ERROR:
    case QC_PARAMETER_OUT_OF_RANGE:
    case QC_ASSUMPTION_VIOLATED: return kUsage;
    default: return kRuntime;
  }
}

void check(qc_status s, const std::string& what) {
  if (s != QC_OK) {
    throw Failure{exit_for(s), what + ": " + qc_status_string(s) + ": " + qc_last_error()};
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw Failure{kRuntime, "cannot write " + path};
  os << text << '\n';
}

void write_json(const std::string& path, const char* text) { write_text(path, nlohmann::json::parse(text).dump(2)); }

struct GraphArgs {
  std::string file;
  std::string family = "er";
  int n = 10;
  double p = 0.3;
  double c = 1.0;
  double radius = 0.0;
  int left = 0;
  int right = 0;
  std::uint64_t seed = 1;

  void add(CLI::App* app, bool with_file) {
    if (with_file) app->add_option("--graph", file, "edge-list file (overrides --family)");
    app->add_option("--family", family, "er | rgg | path | complete | bipartite")
        ->check(CLI::IsMember({"er", "rgg", "path", "complete", "bipartite"}));
    app->add_option("--n", n, "number of nodes")->check(CLI::Range(2, 1000000));
    app->add_option("--p", p, "ER edge probability")->check(CLI::Range(0.0, 1.0));
    app->add_option("--c", c, "RGG scale: radius = sqrt(c ln n / n)");
    app->add_option("--radius", radius, "explicit RGG radius");
    app->add_option("--left", left, "bipartite left side");
    app->add_option("--right", right, "bipartite right side");
    app->add_option("--graph-seed", seed, "graph generator seed");
  }

  GraphPtr build() const {
    qc_graph* g = nullptr;
    if (!file.empty()) {
      check(qc_graph_read(file.c_str(), &g), "reading graph");
    } else if (family == "er") {
      check(qc_graph_erdos_renyi(n, p, seed, &g), "generating graph");
    } else if (family == "rgg") {
      check(radius > 0 ? qc_graph_geometric_radius(n, radius, seed, &g) : qc_graph_geometric(n, c, seed, &g),
            "generating graph");
    } else if (family == "path") {
      check(qc_graph_path(n, &g), "generating graph");
    } else if (family == "complete") {
      check(qc_graph_complete(n, &g), "generating graph");
    } else {
      check(qc_graph_bipartite(left, right, &g), "generating graph");
    }
    return GraphPtr(g);
  }
};

struct WeightArgs {
  std::string scheme = "modified";
  std::string C = "2";
  std::string w = "1/2";
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--weights", scheme, "metropolis | modified | two_node | uniform | file")
        ->check(CLI::IsMember({"metropolis", "modified", "two_node", "uniform", "file"}));
    app->add_option("--C", C, "modified Metropolis constant (p/q or decimal, >= 2)");
    app->add_option("--w", w, "two_node / uniform self weight");
    app->add_option("--weights-file", file, "weights file for --weights file");
  }

  WeightsPtr build(const qc_graph* g) const {
    qc_weights* out = nullptr;
    if (scheme == "metropolis") check(qc_weights_metropolis(g, &out), "building weights");
    else if (scheme == "modified") check(qc_weights_modified(g, C.c_str(), &out), "building weights");
    else if (scheme == "two_node") check(qc_weights_two_node(w.c_str(), &out), "building weights");
    else if (scheme == "uniform") check(qc_weights_uniform(g, w.c_str(), &out), "building weights");
    else {
      if (file.empty()) throw Failure{kUsage, "--weights file needs --weights-file"};
      check(qc_weights_read(file.c_str(), &out), "reading weights");
    }
    return WeightsPtr(out);
  }
};

struct QuantizerArgs {
  std::string quantizer = "trunc";
  std::string step = "1";
  void add(CLI::App* app) {
    app->add_option("--quantizer", quantizer, "trunc | ceil | round | prob")
        ->check(CLI::IsMember({"trunc", "ceil", "round", "prob"}));
    app->add_option("--step", step, "quantization step (p/q or decimal)");
  }
};

int run_gen_graph(const GraphArgs& ga, const std::string& out, const WeightArgs& wa, const std::string& weights_out) {
  GraphPtr g = ga.build();
  check(qc_graph_write(g.get(), out.empty() ? "/dev/stdout" : out.c_str()), "writing graph");
  if (!weights_out.empty()) {
    WeightsPtr w = wa.build(g.get());
    check(qc_weights_write(w.get(), weights_out.c_str()), "writing weights");
  }
  return kOk;
}

struct SimulateArgs {
  std::string x0;
  std::string init = "uniform";
  std::string lo = "0";
  std::string hi = "100";
  std::int64_t denominator = 100;
  std::string fraction = "1/2";
  std::uint64_t seed = 1;
  std::uint64_t max_iters = 1000000;
  bool force = false;
  bool no_monitor = false;
  std::uint64_t stride = 1;
  std::string trace_out = "trace.csv";
  std::string verdict_out = "verdict.json";
  std::string report_out;
  std::string instrumentation_out;
};

int run_simulate(const GraphArgs& ga, const WeightArgs& wa, const QuantizerArgs& qa, const SimulateArgs& sa) {
  GraphPtr g = ga.build();
  WeightsPtr w = wa.build(g.get());
  std::string x0 = sa.x0;
  if (x0.empty()) {
    char* s = nullptr;
    check(qc_initial_state(qc_graph_size(g.get()), sa.init.c_str(), sa.lo.c_str(), sa.hi.c_str(), sa.denominator,
                           sa.fraction.c_str(), sa.seed, &s),
          "drawing initial state");
    x0 = StringPtr(s).get();
  }
  qc_sim_options o;
  qc_sim_options_default(&o);
  o.quantizer = qa.quantizer.c_str();
  o.step = qa.step.c_str();
  o.seed = sa.seed;
  o.max_iters = sa.max_iters;
  o.force = sa.force ? 1 : 0;
  o.monitor = sa.no_monitor ? 0 : 1;
  o.record_stride = sa.stride;

  qc_trace* raw = nullptr;
  const qc_status s = qc_simulate(g.get(), w.get(), x0.c_str(), &o, &raw);
  if (s == QC_ASSUMPTION_VIOLATED) {
    std::cerr << "weights fail the assumption check (use --force to run anyway):\n" << qc_last_error() << '\n';
    return kUsage;
  }
  check(s, "simulating");
  TracePtr t(raw);

  char* verdict = nullptr;
  check(qc_trace_verdict_json(t.get(), &verdict), "verdict");
  StringPtr vp(verdict);
  std::cout << verdict << '\n';
  if (!sa.verdict_out.empty()) write_json(sa.verdict_out, verdict);
  if (!sa.trace_out.empty() && sa.stride > 0) check(qc_trace_write_csv(t.get(), sa.trace_out.c_str()), "writing trace");
  if (!sa.instrumentation_out.empty()) {
    check(qc_trace_write_instrumentation(t.get(), sa.instrumentation_out.c_str()), "writing instrumentation");
  }
  if (!sa.report_out.empty()) {
    char* report = nullptr;
    check(qc_trace_report_json(t.get(), &report), "report");
    write_json(sa.report_out, StringPtr(report).get());
  }
  return kOk;
}

int run_analyze(const std::string& trace, const GraphArgs& ga, const WeightArgs& wa, const QuantizerArgs& qa,
                const std::string& out, const std::string& instrumentation) {
  GraphPtr g = ga.build();
  WeightsPtr w = wa.build(g.get());
  char* report = nullptr;
  check(qc_analyze_trace_file(trace.c_str(), g.get(), w.get(), qa.quantizer.c_str(), qa.step.c_str(),
                              instrumentation.empty() ? nullptr : instrumentation.c_str(), &report),
        "analyzing trace");
  StringPtr rp(report);
  write_json(out, report);
  const auto j = nlohmann::json::parse(report);
  const auto& monitor = j.at("monitor");
  return monitor.value("applicable", false) && !monitor.value("ok", false) ? kViolation : kOk;
}

int run_experiment(const std::string& config, std::vector<std::string> sets, bool full, const std::string& output,
                   int threads) {
  if (full) sets.push_back("full=true");
  if (!output.empty()) sets.push_back("output=" + output);
  if (threads > 0) sets.push_back("threads=" + std::to_string(threads));
  std::vector<const char*> ptrs;
  for (const auto& s : sets) ptrs.push_back(s.c_str());
  char* summary = nullptr;
  check(qc_experiment_run(config.empty() ? nullptr : config.c_str(), ptrs.data(), ptrs.size(), &summary),
        "running experiment");
  std::cout << StringPtr(summary).get() << '\n';
  return kOk;
}

int run_verify(int n, int runs, std::uint64_t seed, int threads, const std::string& out) {
  int ok = 0;
  char* report = nullptr;
  check(qc_verify(n, runs, seed, threads, &ok, &report), "verifying");
  write_json(out, StringPtr(report).get());
  return ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized consensus simulator and analysis lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qc_version()));

  GraphArgs graph_args;
  WeightArgs weight_args;
  QuantizerArgs quantizer_args;

  auto* gen = app.add_subcommand("gen-graph", "generate a connected graph and write its edge list");
  std::string gen_out;
  std::string gen_weights_out;
  graph_args.add(gen, false);
  weight_args.add(gen);
  gen->add_option("--out,-o", gen_out, "edge-list output (default stdout)");
  gen->add_option("--weights-out", gen_weights_out, "also write the weight matrix here");

  auto* sim = app.add_subcommand("simulate", "run one trajectory; write trace CSV and verdict JSON");
  SimulateArgs sim_args;
  graph_args.add(sim, true);
  weight_args.add(sim);
  quantizer_args.add(sim);
  sim->add_option("--x0", sim_args.x0, "initial state, comma-separated rationals");
  sim->add_option("--init", sim_args.init, "uniform | forced (when --x0 is absent)")
      ->check(CLI::IsMember({"uniform", "forced"}));
  sim->add_option("--lo", sim_args.lo, "lower end of random initial values");
  sim->add_option("--hi", sim_args.hi, "upper end of random initial values");
  sim->add_option("--denominator", sim_args.denominator, "random initial values are multiples of 1/denominator");
  sim->add_option("--fraction", sim_args.fraction, "forced fractional part of the average");
  sim->add_option("--seed", sim_args.seed, "initial-state and probabilistic-quantizer seed");
  sim->add_option("--max-iters", sim_args.max_iters, "iteration budget");
  sim->add_flag("--force", sim_args.force, "run even when the weights fail the assumption check");
  sim->add_flag("--no-monitor", sim_args.no_monitor, "skip the Lyapunov monitor");
  sim->add_option("--record-stride", sim_args.stride, "record every k-th state (0 = none)");
  sim->add_option("--trace", sim_args.trace_out, "trace CSV output ('' to skip)");
  sim->add_option("--verdict", sim_args.verdict_out, "verdict JSON output ('' to skip)");
  sim->add_option("--report", sim_args.report_out, "monitor / metric report JSON output");
  sim->add_option("--instrumentation", sim_args.instrumentation_out, "per-iteration monitor CSV output");

  auto* an = app.add_subcommand("analyze", "replay a trace CSV through the monitors");
  std::string an_trace;
  std::string an_out;
  std::string an_instr;
  an->add_option("--trace", an_trace, "trace CSV (k,i,x_num,x_den,floor_x)")->required();
  graph_args.add(an, true);
  weight_args.add(an);
  quantizer_args.add(an);
  an->add_option("--out,-o", an_out, "report JSON output (default stdout)");
  an->add_option("--instrumentation", an_instr, "per-iteration monitor CSV output");

  auto* ex = app.add_subcommand("experiment", "run an experiment config (sweep.csv, runs/, traces/)");
  std::string ex_config;
  std::vector<std::string> ex_sets;
  bool ex_full = false;
  std::string ex_output;
  int ex_threads = 0;
  bool ex_help_config = false;
  ex->add_option("--config,-c", ex_config, "key = value config file");
  ex->add_option("--set", ex_sets, "override, key=value (repeatable)");
  ex->add_flag("--full", ex_full, "full scale: n = 100, runs = 100");
  ex->add_option("--output,-o", ex_output, "output directory");
  ex->add_option("--threads", ex_threads, "worker threads (0 = hardware)");
  ex->add_flag("--help-config", ex_help_config, "list config keys");

  auto* ver = app.add_subcommand("verify", "seeded invariant suite; exit 2 on any violation");
  int ver_n = 10;
  int ver_runs = 50;
  std::uint64_t ver_seed = 7;
  int ver_threads = 0;
  std::string ver_out;
  ver->add_option("--n", ver_n, "nodes per instance")->check(CLI::Range(2, 100000));
  ver->add_option("--runs", ver_runs, "instances")->check(CLI::Range(1, 10000000));
  ver->add_option("--seed", ver_seed, "base seed");
  ver->add_option("--threads", ver_threads, "worker threads (0 = hardware)");
  ver->add_option("--out,-o", ver_out, "report JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return run_gen_graph(graph_args, gen_out, weight_args, gen_weights_out);
    if (*sim) return run_simulate(graph_args, weight_args, quantizer_args, sim_args);
    if (*an) return run_analyze(an_trace, graph_args, weight_args, quantizer_args, an_out, an_instr);
    if (*ex) {
      if (ex_help_config) {
        std::cout << qc_config_help();
        return kOk;
      }
      return run_experiment(ex_config, ex_sets, ex_full, ex_output, ex_threads);
    }
    if (*ver) return run_verify(ver_n, ver_runs, ver_seed, ver_threads, ver_out);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
