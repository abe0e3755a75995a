#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcons/analysis.hpp"
#include "qcons/dynamics.hpp"
#include "qcons/graph.hpp"
#include "qcons/numeric.hpp"
#include "qcons/quantizer.hpp"
#include "qcons/weights.hpp"

namespace qcons {

enum class GraphFamily { ErdosRenyi, Geometric, Path, Complete, Bipartite, File };
enum class WeightScheme { Metropolis, Modified, TwoNode, UniformSelf, File };
enum class InitRecipe { Uniform, Forced, Explicit };

const char* to_string(GraphFamily f) noexcept;
const char* to_string(WeightScheme s) noexcept;
const char* to_string(InitRecipe r) noexcept;

/// Flat key = value configuration. Exactly one key may carry a
/// comma-separated list; it becomes the sweep axis. See config_help().
struct ExperimentConfig {
  GraphFamily graph = GraphFamily::ErdosRenyi;
  int n = 10;
  Rational p = Rational(3, 10);      // ER edge probability
  Rational c = Rational(1);          // RGG radius scale: R = sqrt(c ln n / n)
  std::optional<Rational> radius;    // explicit RGG radius, overrides c
  int left = 0;
  int right = 0;
  std::string graph_file;

  WeightScheme weights = WeightScheme::Modified;
  Rational C = Rational(2);
  Rational w = Rational(1, 2);       // two-node / uniform-self weight
  std::string weights_file;

  QuantizerKind quantizer;

  InitRecipe init = InitRecipe::Uniform;
  Rational lo = Rational(0);
  Rational hi = Rational(100);
  std::int64_t denominator = 100;
  Rational fraction = Rational(1, 2);  // forced fractional part of x_ave
  State x0;                            // explicit recipe

  int runs = 20;
  std::uint64_t seed = 1;
  std::uint64_t max_iters = kDefaultMaxIters;
  bool force = false;
  bool monitor = true;
  int trace_sample = 0;  // runs (per cell) whose traces and instrumentation are written
  std::string output;    // empty: no files
  int threads = 0;       // 0: hardware concurrency

  std::string sweep_key;
  std::vector<std::string> sweep_values;
};

/// Applies one key = value pair. A comma-separated value on any key other
/// than x0 sets the sweep axis. InvalidArgument for unknown keys, ParseError
/// for bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Checks ranges and cross-field requirements; InvalidArgument on failure.
void validate(const ExperimentConfig& cfg);
/// Key documentation for --help.
std::string config_help();

/// Seed of run r; identical across sweep cells so cells compare matched instances.
std::uint64_t run_seed(const ExperimentConfig& cfg, int r);

struct Instance {
  Graph graph;
  WeightMatrix weights;
  State x0;
};

/// Graph, weights and initial state of one run (cfg must have no sweep axis).
Instance build_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// Initial state per the configured recipe. The forced recipe draws n-1
/// values and sets the last so that frac(x_ave) = fraction and the last
/// value lands near the middle of [lo, hi].
State make_initial_state(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunRecord {
  std::size_t cell = 0;
  int run = 0;
  std::uint64_t seed = 0;
  int n = 0;
  std::optional<Verdict> verdict;
  std::uint64_t t_conv = 0;
  std::optional<Rational> d_inf_squared;
  std::optional<Rational> deviation;  // max |x_i - x_ave| over the terminal regime
  Rational x_ave;
  std::optional<Rational> alpha_max;
  bool certificate = false;
  bool monitored = false;
  std::size_t violations = 0;
  std::string first_violation;
  std::string error;  // per-run failure, empty on success
};

struct SweepCell {
  std::string key;
  std::string value;
  int runs = 0;
  int completed = 0;
  int consensus = 0;
  int cycle = 0;
  int undecided = 0;
  int failed = 0;
  Rational mean_t_conv;   // over completed runs
  double mean_d_inf = 0;  // over decided runs
  Rational max_deviation;
  std::size_t violations = 0;
  std::optional<Rational> deviation_bound;
  bool within_bound = true;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<RunRecord> runs;  // cell-major, then run index
};

/// Runs every (cell, run) pair on a thread pool. Results do not depend on the
/// thread count. Writes sweep.csv, runs/<seed>.json and sampled traces when
/// cfg.output is set.
SweepResult run_experiment(const ExperimentConfig& cfg);

/// Sweep over C with terminal deviation checked against 2/C in every cell.
SweepResult sweep_C(ExperimentConfig cfg, std::span<const Rational> Cs);

void write_sweep_csv(std::ostream& os, const SweepResult& r);
/// Recomputes the cell aggregates from the retained run records.
std::vector<SweepCell> aggregate(const ExperimentConfig& cfg, std::span<const RunRecord> runs);

struct VerifyReport {
  int runs = 0;
  int consensus = 0;
  int cycle = 0;
  std::vector<std::string> failures;
  bool ok() const noexcept { return failures.empty(); }
};

/// Seeded invariant suite: conservation, dichotomy, terminal bounds, every
/// monitor check, the averaging corollaries, the certificate and the quantizer
/// reductions, over ER and RGG instances with modified Metropolis weights.
VerifyReport verify_invariants(int n, int runs, std::uint64_t seed, int threads = 0);

}  // namespace qcons
