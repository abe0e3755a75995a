#include "qcons/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qcons/error.hpp"
#include "qcons/grid.hpp"
#include "qcons/io.hpp"
#include "qcons/rng.hpp"

namespace qcons {

const char* to_string(GraphFamily f) noexcept {
  switch (f) {
    case GraphFamily::ErdosRenyi: return "er";
    case GraphFamily::Geometric: return "rgg";
    case GraphFamily::Path: return "path";
    case GraphFamily::Complete: return "complete";
    case GraphFamily::Bipartite: return "bipartite";
    case GraphFamily::File: return "file";
  }
  return "?";
}

const char* to_string(WeightScheme s) noexcept {
  switch (s) {
    case WeightScheme::Metropolis: return "metropolis";
    case WeightScheme::Modified: return "modified";
    case WeightScheme::TwoNode: return "two_node";
    case WeightScheme::UniformSelf: return "uniform";
    case WeightScheme::File: return "file";
  }
  return "?";
}

const char* to_string(InitRecipe r) noexcept {
  switch (r) {
    case InitRecipe::Uniform: return "uniform";
    case InitRecipe::Forced: return "forced";
    case InitRecipe::Explicit: return "explicit";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw Error(ErrorCode::ParseError, key + " = '" + value + "': " + what);
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "integer expected");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.front() == '-') bad_value(key, v, "non-negative integer expected");
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "non-negative integer expected");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "boolean expected");
}

Rational parse_rational(const std::string& key, const std::string& v) {
  try {
    return Rational::parse(v);
  } catch (const Error& e) {
    bad_value(key, v, e.what());
  }
}

int parse_count(const std::string& key, const std::string& v) {
  const auto x = parse_int(key, v);
  if (x < 0 || x > 1'000'000) bad_value(key, v, "out of range");
  return static_cast<int>(x);
}

void apply_scalar(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
  if (key == "graph") {
    if (v == "er") cfg.graph = GraphFamily::ErdosRenyi;
    else if (v == "rgg") cfg.graph = GraphFamily::Geometric;
    else if (v == "path") cfg.graph = GraphFamily::Path;
    else if (v == "complete") cfg.graph = GraphFamily::Complete;
    else if (v == "bipartite") cfg.graph = GraphFamily::Bipartite;
    else if (v == "file") cfg.graph = GraphFamily::File;
    else bad_value(key, v, "one of er, rgg, path, complete, bipartite, file");
  } else if (key == "n") {
    cfg.n = parse_count(key, v);
  } else if (key == "p") {
    cfg.p = parse_rational(key, v);
  } else if (key == "c") {
    cfg.c = parse_rational(key, v);
  } else if (key == "radius") {
    cfg.radius = parse_rational(key, v);
  } else if (key == "left") {
    cfg.left = parse_count(key, v);
  } else if (key == "right") {
    cfg.right = parse_count(key, v);
  } else if (key == "graph_file") {
    cfg.graph_file = v;
  } else if (key == "weights") {
    if (v == "metropolis") cfg.weights = WeightScheme::Metropolis;
    else if (v == "modified") cfg.weights = WeightScheme::Modified;
    else if (v == "two_node") cfg.weights = WeightScheme::TwoNode;
    else if (v == "uniform") cfg.weights = WeightScheme::UniformSelf;
    else if (v == "file") cfg.weights = WeightScheme::File;
    else bad_value(key, v, "one of metropolis, modified, two_node, uniform, file");
  } else if (key == "C") {
    cfg.C = parse_rational(key, v);
  } else if (key == "w") {
    cfg.w = parse_rational(key, v);
  } else if (key == "weights_file") {
    cfg.weights_file = v;
  } else if (key == "quantizer") {
    try {
      cfg.quantizer.variant = parse_quantizer_variant(v);
    } catch (const Error& e) {
      bad_value(key, v, e.what());
    }
  } else if (key == "step") {
    cfg.quantizer.step = parse_rational(key, v);
  } else if (key == "init") {
    if (v == "uniform") cfg.init = InitRecipe::Uniform;
    else if (v == "forced") cfg.init = InitRecipe::Forced;
    else if (v == "explicit") cfg.init = InitRecipe::Explicit;
    else bad_value(key, v, "one of uniform, forced, explicit");
  } else if (key == "lo") {
    cfg.lo = parse_rational(key, v);
  } else if (key == "hi") {
    cfg.hi = parse_rational(key, v);
  } else if (key == "denominator") {
    cfg.denominator = parse_int(key, v);
  } else if (key == "fraction") {
    cfg.fraction = parse_rational(key, v);
  } else if (key == "runs") {
    cfg.runs = parse_count(key, v);
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, v);
  } else if (key == "max_iters") {
    cfg.max_iters = parse_uint(key, v);
  } else if (key == "force") {
    cfg.force = parse_bool(key, v);
  } else if (key == "monitor") {
    cfg.monitor = parse_bool(key, v);
  } else if (key == "trace_sample") {
    cfg.trace_sample = parse_count(key, v);
  } else if (key == "output") {
    cfg.output = v;
  } else if (key == "threads") {
    cfg.threads = parse_count(key, v);
  } else if (key == "full") {
    if (parse_bool(key, v)) {
      cfg.n = 100;
      cfg.runs = 100;
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "x0") {
    cfg.x0.clear();
    for (const auto& item : split_list(value)) cfg.x0.push_back(parse_rational(key, item));
    cfg.init = InitRecipe::Explicit;
    return;
  }
  if (value.find(',') == std::string::npos) {
    apply_scalar(cfg, key, value);
    return;
  }
  if (!cfg.sweep_key.empty() && cfg.sweep_key != key) {
    throw Error(ErrorCode::InvalidArgument, "only one sweep axis allowed: '" + cfg.sweep_key + "' and '" + key + "'");
  }
  auto values = split_list(value);
  for (const auto& v : values) {
    ExperimentConfig probe = cfg;
    apply_scalar(probe, key, v);
  }
  if (key == "output" || key == "runs" || key == "seed" || key == "threads" || key == "trace_sample" || key == "full") {
    throw Error(ErrorCode::InvalidArgument, "'" + key + "' cannot be a sweep axis");
  }
  apply_scalar(cfg, key, values.front());
  cfg.sweep_key = key;
  cfg.sweep_values = std::move(values);
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(lineno) + ": key = value expected");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  return parse_config(in);
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (cfg.runs < 1) fail("runs must be at least 1");
  if (cfg.graph == GraphFamily::Bipartite) {
    if (cfg.left < 1 || cfg.right < 1) fail("bipartite graphs need left and right >= 1");
  } else if (cfg.graph != GraphFamily::File && cfg.n < 2) {
    fail("n must be at least 2");
  }
  if (cfg.graph == GraphFamily::ErdosRenyi && (cfg.p.sign() <= 0 || cfg.p > Rational(1))) fail("p must be in (0, 1]");
  if (cfg.graph == GraphFamily::Geometric && cfg.c.sign() <= 0 && !cfg.radius) fail("c must be positive");
  if (cfg.radius && cfg.radius->sign() <= 0) fail("radius must be positive");
  if (cfg.graph == GraphFamily::File && cfg.graph_file.empty()) fail("graph = file needs graph_file");
  if (cfg.weights == WeightScheme::File && cfg.weights_file.empty()) fail("weights = file needs weights_file");
  if (cfg.weights == WeightScheme::Modified && cfg.C < Rational(2)) fail("C must be at least 2");
  if (cfg.quantizer.step.sign() <= 0) fail("step must be positive");
  if (cfg.denominator < 1) fail("denominator must be positive");
  if (cfg.hi < cfg.lo) fail("hi must not be below lo");
  if (cfg.fraction.sign() < 0 || cfg.fraction >= Rational(1)) fail("fraction must be in [0, 1)");
  if (cfg.init == InitRecipe::Explicit && cfg.x0.empty()) fail("init = explicit needs x0");
}

std::string config_help() {
  return R"(Experiment config: one "key = value" per line, '#' starts a comment.
A comma-separated value on one key (other than x0) makes that key the sweep axis.

  graph         er | rgg | path | complete | bipartite | file      (er)
  n             number of nodes                                    (10)
  p             ER edge probability, rational                      (3/10)
  c             RGG scale, radius sqrt(c ln n / n)                 (1)
  radius        explicit RGG radius (overrides c)
  left, right   bipartite side sizes
  graph_file    edge list for graph = file
  weights       metropolis | modified | two_node | uniform | file   (modified)
  C             modified Metropolis constant, >= 2                 (2)
  w             two_node / uniform self weight                     (1/2)
  weights_file  weights for weights = file
  quantizer     trunc | ceil | round | prob                        (trunc)
  step          quantization step                                  (1)
  init          uniform | forced | explicit                        (uniform)
  lo, hi        range of uniform initial values                    (0, 100)
  denominator   initial values are multiples of 1/denominator      (100)
  fraction      forced fractional part of the average              (1/2)
  x0            explicit initial state, comma-separated rationals
  runs          runs per sweep cell                                (20)
  seed          base seed                                          (1)
  max_iters     iteration budget per run                           (1000000)
  force         run weights that fail the assumption check         (false)
  monitor       attach the Lyapunov monitor                        (true)
  trace_sample  runs per cell whose traces are written             (0)
  output        output directory (sweep.csv, runs/, traces/)
  threads       worker threads, 0 = hardware                       (0)
  full          n = 100 and runs = 100                             (false)
)";
}

std::uint64_t run_seed(const ExperimentConfig& cfg, int r) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
}

namespace {

State draw_initial_state(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
  if (cfg.init == InitRecipe::Explicit) return cfg.x0;
  Rng rng(derive_seed(seed, 2));
  const Integer den(static_cast<long>(cfg.denominator));
  const Integer lo = (cfg.lo * Rational(den)).ceil();
  const Integer hi = (cfg.hi * Rational(den)).floor();
  if (hi < lo || !lo.fits_slong_p() || !hi.fits_slong_p()) {
    throw Error(ErrorCode::InvalidArgument, "initial range is empty or too wide for the denominator");
  }
  auto draw = [&] { return Rational(Integer(static_cast<long>(rng.uniform_int(lo.get_si(), hi.get_si()))), den); };
  State x;
  x.reserve(static_cast<std::size_t>(n));
  const int drawn = cfg.init == InitRecipe::Forced ? n - 1 : n;
  for (int i = 0; i < drawn; ++i) x.push_back(draw());
  if (cfg.init == InitRecipe::Forced) {
    const Rational S = state_sum(x);
    const Rational mid = (cfg.lo + cfg.hi) / Rational(2);
    const Rational N(n);
    const Integer K = ((S + mid) / N - cfg.fraction + Rational(1, 2)).floor();
    x.push_back(N * (Rational(K) + cfg.fraction) - S);
  }
  return x;
}

}  // namespace

State make_initial_state(const ExperimentConfig& cfg, std::uint64_t seed) {
  return draw_initial_state(cfg, cfg.graph == GraphFamily::Bipartite ? cfg.left + cfg.right : cfg.n, seed);
}

Instance build_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.sweep_key.empty() && cfg.sweep_values.size() > 1) {
    throw Error(ErrorCode::InvalidArgument, "build_instance needs a single sweep cell");
  }
  const std::uint64_t gseed = derive_seed(seed, 1);
  std::optional<Graph> g;
  switch (cfg.graph) {
    case GraphFamily::ErdosRenyi: g = erdos_renyi(cfg.n, cfg.p.to_double(), gseed); break;
    case GraphFamily::Geometric:
      g = cfg.radius ? random_geometric_radius(cfg.n, cfg.radius->to_double(), gseed).first
                     : random_geometric(cfg.n, cfg.c.to_double(), gseed).first;
      break;
    case GraphFamily::Path: g = path_graph(cfg.n); break;
    case GraphFamily::Complete: g = complete_graph(cfg.n); break;
    case GraphFamily::Bipartite: g = complete_bipartite_regular(cfg.left, cfg.right); break;
    case GraphFamily::File: {
      std::ifstream in(cfg.graph_file);
      if (!in) throw Error(ErrorCode::IoError, "cannot open graph file " + cfg.graph_file);
      g = read_edge_list(in);
      break;
    }
  }
  std::optional<WeightMatrix> w;
  switch (cfg.weights) {
    case WeightScheme::Metropolis: w = metropolis(*g); break;
    case WeightScheme::Modified: w = modified_metropolis(*g, cfg.C); break;
    case WeightScheme::TwoNode:
      if (g->size() != 2) throw Error(ErrorCode::InvalidArgument, "two_node weights need a 2-node graph");
      w = two_node_cyclic(cfg.w);
      break;
    case WeightScheme::UniformSelf: w = uniform_self_weight(*g, cfg.w); break;
    case WeightScheme::File: {
      std::ifstream in(cfg.weights_file);
      if (!in) throw Error(ErrorCode::IoError, "cannot open weights file " + cfg.weights_file);
      w = read_weights(in);
      break;
    }
  }
  if (w->size() != g->size()) throw Error(ErrorCode::InvalidArgument, "weights and graph sizes differ");
  State x0 = draw_initial_state(cfg, g->size(), seed);
  if (static_cast<int>(x0.size()) != g->size()) {
    throw Error(ErrorCode::InvalidArgument, "x0 has " + std::to_string(x0.size()) + " entries for " +
                                                std::to_string(g->size()) + " nodes");
  }
  return Instance{std::move(*g), std::move(*w), std::move(x0)};
}

namespace {

std::size_t cell_count(const ExperimentConfig& cfg) {
  return cfg.sweep_key.empty() ? 1 : cfg.sweep_values.size();
}

ExperimentConfig cell_config(const ExperimentConfig& cfg, std::size_t cell) {
  ExperimentConfig out = cfg;
  if (!cfg.sweep_key.empty()) apply_scalar(out, cfg.sweep_key, cfg.sweep_values[cell]);
  out.sweep_key.clear();
  out.sweep_values.clear();
  return out;
}

std::string trace_stem(const ExperimentConfig& cfg, const RunRecord& r) {
  std::string s = std::to_string(r.seed);
  if (cell_count(cfg) > 1) s += "_c" + std::to_string(r.cell);
  return s;
}

RunRecord execute(const ExperimentConfig& base, const ExperimentConfig& cfg, std::size_t cell, int run) {
  RunRecord rec;
  rec.cell = cell;
  rec.run = run;
  rec.seed = run_seed(base, run);
  try {
    Instance inst = build_instance(cfg, rec.seed);
    rec.n = inst.graph.size();
    rec.x_ave = state_average(inst.x0);
    QuantizerKind q = cfg.quantizer;
    q.seed = derive_seed(rec.seed, 3);

    const bool sampled = !base.output.empty() && run < base.trace_sample;
    SimOptions sim;
    sim.max_iters = cfg.max_iters;
    sim.force = cfg.force;
    sim.record = sampled ? RecordPolicy::full() : RecordPolicy::none();

    std::optional<GridConstants> constants;
    Trace trace;
    std::vector<IterationReport> rows;
    if (cfg.monitor) {
      MonitoredRun mr = simulate_monitored(inst.graph, inst.weights, q, inst.x0, sim);
      trace = std::move(mr.trace);
      rows = std::move(mr.iterations);
      constants = mr.constants;
      rec.monitored = mr.report.applicable;
      rec.violations = mr.report.violations.size();
      if (!mr.report.violations.empty()) {
        const auto& v = mr.report.violations.front();
        rec.first_violation = v.check + " at k=" + std::to_string(v.k);
      }
    } else {
      trace = simulate(inst.graph, inst.weights, q, inst.x0, sim);
      if (q.deterministic() && trace.assumption_satisfied) {
        constants = compute_grid_constants(inst.weights, truncation_frame(q).to_frame(inst.x0));
      }
    }
    if (constants) {
      rec.alpha_max = constants->alpha_max();
      rec.certificate = consensus_certificate(truncation_frame(q).to_frame(inst.x0), *rec.alpha_max);
    }
    rec.verdict = trace.verdict;
    rec.t_conv = terminal_time(trace.verdict);
    if (is_decided(trace.verdict)) {
      rec.d_inf_squared = d_infinity(trace).squared;
      rec.deviation = terminal_deviation(trace);
    }
    if (sampled) {
      const auto dir = std::filesystem::path(base.output) / "traces";
      const std::string stem = trace_stem(base, rec);
      std::ofstream out(dir / (stem + ".csv"));
      write_trace_csv(out, trace.states);
      if (!rows.empty()) {
        std::ofstream lyap(dir / (stem + ".lyapunov.csv"));
        write_instrumentation_csv(lyap, rows);
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
  };
  if (workers <= 1) {
    body();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(body);
}

nlohmann::json record_json(const ExperimentConfig& cfg, const RunRecord& r) {
  nlohmann::json j;
  j["cell"] = r.cell;
  if (!cfg.sweep_key.empty()) {
    j["key"] = cfg.sweep_key;
    j["value"] = cfg.sweep_values[r.cell];
  }
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["n"] = r.n;
  if (!r.error.empty()) {
    j["error"] = r.error;
    return j;
  }
  j["verdict"] = verdict_to_json(*r.verdict);
  j["t_conv"] = r.t_conv;
  j["x_ave"] = r.x_ave.str();
  if (r.d_inf_squared) {
    j["d_inf_squared"] = r.d_inf_squared->str();
    j["d_inf"] = sqrt_decimal(*r.d_inf_squared);
  }
  if (r.deviation) j["deviation"] = r.deviation->str();
  if (r.alpha_max) j["alpha_max"] = r.alpha_max->str();
  j["certificate"] = r.certificate;
  j["monitored"] = r.monitored;
  j["violations"] = r.violations;
  if (!r.first_violation.empty()) j["first_violation"] = r.first_violation;
  return j;
}

void write_artifacts(const ExperimentConfig& cfg, const SweepResult& result) {
  const std::filesystem::path root(cfg.output);
  {
    std::ofstream out(root / "sweep.csv");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (root / "sweep.csv").string());
    write_sweep_csv(out, result);
  }
  std::map<std::uint64_t, nlohmann::json> by_seed;
  for (const auto& r : result.runs) by_seed[r.seed].push_back(record_json(cfg, r));
  for (const auto& [seed, arr] : by_seed) {
    std::ofstream out(root / "runs" / (std::to_string(seed) + ".json"));
    out << arr.dump(2) << '\n';
  }
}

}  // namespace

std::vector<SweepCell> aggregate(const ExperimentConfig& cfg, std::span<const RunRecord> runs) {
  std::vector<SweepCell> cells(cell_count(cfg));
  std::vector<Rational> t_sum(cells.size());
  std::vector<int> decided(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].key = cfg.sweep_key;
    cells[c].value = cfg.sweep_key.empty() ? "" : cfg.sweep_values[c];
    if (cfg.sweep_key == "C") cells[c].deviation_bound = Rational(2) / Rational::parse(cfg.sweep_values[c]);
    else if (cfg.weights == WeightScheme::Modified && cfg.sweep_key.empty()) cells[c].deviation_bound = Rational(2) / cfg.C;
  }
  for (const auto& r : runs) {
    SweepCell& cell = cells.at(r.cell);
    ++cell.runs;
    if (!r.error.empty()) {
      ++cell.failed;
      continue;
    }
    ++cell.completed;
    t_sum[r.cell] += Rational(r.t_conv);
    cell.violations += r.violations;
    if (std::holds_alternative<QuantizedConsensus>(*r.verdict)) ++cell.consensus;
    else if (std::holds_alternative<Cycle>(*r.verdict)) ++cell.cycle;
    else ++cell.undecided;
    if (r.d_inf_squared) {
      ++decided[r.cell];
      cell.mean_d_inf += std::sqrt(r.d_inf_squared->to_double());
    }
    if (r.deviation) {
      cell.max_deviation = max(cell.max_deviation, *r.deviation);
      if (cell.deviation_bound && std::holds_alternative<Cycle>(*r.verdict) && *r.deviation > *cell.deviation_bound) {
        cell.within_bound = false;
      }
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].completed > 0) cells[c].mean_t_conv = t_sum[c] / Rational(cells[c].completed);
    if (decided[c] > 0) cells[c].mean_d_inf /= decided[c];
  }
  return cells;
}

SweepResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t cells = cell_count(cfg);
  std::vector<ExperimentConfig> configs;
  for (std::size_t c = 0; c < cells; ++c) {
    configs.push_back(cell_config(cfg, c));
    validate(configs.back());
  }
  if (!cfg.output.empty()) {
    std::filesystem::create_directories(std::filesystem::path(cfg.output) / "runs");
    if (cfg.trace_sample > 0) std::filesystem::create_directories(std::filesystem::path(cfg.output) / "traces");
  }

  SweepResult result;
  const auto runs = static_cast<std::size_t>(cfg.runs);
  result.runs.resize(cells * runs);
  parallel_for(result.runs.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t c = i / runs;
    result.runs[i] = execute(cfg, configs[c], c, static_cast<int>(i % runs));
  });
  result.cells = aggregate(cfg, result.runs);
  if (!cfg.output.empty()) write_artifacts(cfg, result);
  return result;
}

SweepResult sweep_C(ExperimentConfig cfg, std::span<const Rational> Cs) {
  if (Cs.empty()) throw Error(ErrorCode::InvalidArgument, "no C values");
  for (const auto& C : Cs) {
    if (C < Rational(2)) throw Error(ErrorCode::ParameterOutOfRange, "C values must be at least 2");
  }
  cfg.weights = WeightScheme::Modified;
  cfg.sweep_key = "C";
  cfg.sweep_values.clear();
  for (const auto& C : Cs) cfg.sweep_values.push_back(C.str());
  cfg.C = Cs.front();
  return run_experiment(cfg);
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "cell,key,value,runs,completed,consensus,cycle,undecided,failed,mean_t_conv,mean_t_conv_exact,"
        "mean_d_inf,max_deviation,deviation_bound,within_bound,violations\n";
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const SweepCell& s = r.cells[c];
    char mean[64];
    std::snprintf(mean, sizeof mean, "%.6f", s.mean_t_conv.to_double());
    char dinf[64];
    std::snprintf(dinf, sizeof dinf, "%.6f", s.mean_d_inf);
    os << c << ',' << s.key << ',' << s.value << ',' << s.runs << ',' << s.completed << ',' << s.consensus << ','
       << s.cycle << ',' << s.undecided << ',' << s.failed << ',' << mean << ',' << s.mean_t_conv.str() << ','
       << dinf << ',' << s.max_deviation.str() << ',' << (s.deviation_bound ? s.deviation_bound->str() : "") << ','
       << (s.within_bound ? 1 : 0) << ',' << s.violations << '\n';
  }
}

namespace {

void check_run(int r, std::uint64_t seed, int n, std::vector<std::string>& failures, int& consensus, int& cycle) {
  auto fail = [&](const std::string& what) {
    failures.push_back("run " + std::to_string(r) + " (seed " + std::to_string(seed) + "): " + what);
  };
  ExperimentConfig cfg;
  cfg.n = n;
  cfg.graph = r % 2 == 0 ? GraphFamily::ErdosRenyi : GraphFamily::Geometric;
  cfg.p = Rational(3, 10);
  cfg.c = Rational(2);
  cfg.C = (r / 2) % 2 == 0 ? Rational(2) : Rational(3);
  cfg.init = (r / 4) % 2 == 0 ? InitRecipe::Uniform : InitRecipe::Forced;
  const Instance inst = build_instance(cfg, seed);
  const QuantizerKind trunc;

  const Rational sum0 = state_sum(inst.x0);
  std::uint64_t sum_breaks = 0;
  SimOptions sim;
  sim.observer = [&](std::uint64_t, const State& x) {
    if (state_sum(x) != sum0) ++sum_breaks;
  };
  const bool reductions = r % 4 == 0;
  if (reductions) sim.record = RecordPolicy::full();
  else sim.record = RecordPolicy::none();
  MonitoredRun mr = simulate_monitored(inst.graph, inst.weights, trunc, inst.x0, sim);
  const Trace& t = mr.trace;
  if (sum_breaks) fail("state sum changed on " + std::to_string(sum_breaks) + " iteration(s)");
  if (!mr.report.applicable) {
    fail("monitor not applicable: " + mr.report.reason);
    return;
  }
  if (!mr.report.ok()) fail("monitor: " + mr.report.summary());
  if (!is_decided(t.verdict)) {
    fail("undecided after " + std::to_string(t.last_k) + " iterations");
    return;
  }
  const Rational ave = state_average(inst.x0);
  const Rational two_alpha = Rational(2) * mr.constants->alpha_max();
  for (const State& x : t.terminal) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*hi - *lo >= Rational(1)) fail("terminal spread " + (*hi - *lo).str() + " >= 1");
  }
  const bool cyc = std::holds_alternative<Cycle>(t.verdict);
  if (cyc) {
    ++cycle;
    if (terminal_deviation(t) > two_alpha) fail("cycle deviation exceeds 2 alpha");
    if (d_infinity(t).squared > Rational(1, 4)) fail("cycle d_inf exceeds 1/2");
    for (const auto& y : running_average(t).limit) {
      if ((y - ave).abs() > two_alpha) fail("running-average limit " + y.str() + " further than 2 alpha from the average");
    }
  } else {
    ++consensus;
  }
  if (consensus_certificate(inst.x0, mr.constants->alpha_max()) && cyc) fail("certificate holds but the run cycled");

  if (reductions) {
    for (QuantizerVariant v : {QuantizerVariant::Ceiling, QuantizerVariant::Rounding}) {
      QuantizerKind q;
      q.variant = v;
      SimOptions s;
      s.max_iters = t.last_k;
      const Trace other = simulate(inst.graph, inst.weights, q, inst.x0, s);
      const Reduction red = reduce_to_truncation(q, inst.x0);
      const Trace mapped = simulate(inst.graph, inst.weights, trunc, red.y0, s);
      bool same = other.states.size() == mapped.states.size() && verdict_kind(other.verdict) == verdict_kind(mapped.verdict) &&
                  terminal_time(other.verdict) == terminal_time(mapped.verdict);
      for (std::size_t k = 0; same && k < other.states.size(); ++k) {
        same = red.inverse.to_frame(other.states[k].x) == mapped.states[k].x;
      }
      if (!same) fail(std::string(to_string(v)) + " trace differs from the reduced truncation trace");
    }
  }
}

}  // namespace

VerifyReport verify_invariants(int n, int runs, std::uint64_t seed, int threads) {
  if (n < 2 || runs < 1) throw Error(ErrorCode::InvalidArgument, "verify needs n >= 2 and runs >= 1");
  struct Slot {
    std::vector<std::string> failures;
    int consensus = 0;
    int cycle = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(runs));
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const int r = static_cast<int>(i);
    const std::uint64_t s = derive_seed(seed, i);
    try {
      check_run(r, s, n, slots[i].failures, slots[i].consensus, slots[i].cycle);
    } catch (const std::exception& e) {
      slots[i].failures.push_back("run " + std::to_string(r) + " (seed " + std::to_string(s) + "): " + e.what());
    }
  });
  VerifyReport out;
  out.runs = runs;
  for (auto& s : slots) {
    out.consensus += s.consensus;
    out.cycle += s.cycle;
    for (auto& f : s.failures) out.failures.push_back(std::move(f));
  }
  return out;
}

}  // namespace qcons
