#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "qcons/error.hpp"
#include "qcons/experiments.hpp"
#include "qcons/io.hpp"

using namespace qcons;

TEST_CASE("config parsing") {
  std::stringstream ss(
      "# comment\n"
      "graph = rgg\n"
      "n = 12\n"
      "c = 1,2,4\n"
      "weights = modified\n"
      "C = 5/2\n"
      "quantizer = round\n"
      "init = forced\n"
      "fraction = 0.5\n"
      "runs = 3\n");
  const ExperimentConfig cfg = parse_config(ss);
  CHECK(cfg.graph == GraphFamily::Geometric);
  CHECK(cfg.n == 12);
  CHECK(cfg.C == Rational(5, 2));
  CHECK(cfg.quantizer.variant == QuantizerVariant::Rounding);
  CHECK(cfg.init == InitRecipe::Forced);
  CHECK(cfg.fraction == Rational(1, 2));
  CHECK(cfg.sweep_key == "c");
  CHECK(cfg.sweep_values == std::vector<std::string>{"1", "2", "4"});
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("config errors") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), Error);
  CHECK_THROWS_AS(apply_setting(cfg, "n", "ten"), Error);
  CHECK_THROWS_AS(apply_setting(cfg, "runs", "1,2"), Error);
  apply_setting(cfg, "n", "5,6");
  CHECK_THROWS_AS(apply_setting(cfg, "C", "2,3"), Error);
  ExperimentConfig bad;
  bad.n = 1;
  CHECK_THROWS_AS(validate(bad), Error);
  ExperimentConfig full;
  apply_setting(full, "full", "true");
  CHECK(full.n == 100);
  CHECK(full.runs == 100);
  ExperimentConfig ex;
  apply_setting(ex, "x0", "1/2,3,7/4");
  CHECK(ex.init == InitRecipe::Explicit);
  CHECK(ex.x0.size() == 3);
  CHECK(ex.sweep_key.empty());
}

TEST_CASE("forced initial states hit the requested fractional part") {
  for (const Rational f : {Rational(1, 2), Rational(0), Rational(3, 10)}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      ExperimentConfig cfg;
      cfg.n = 15;
      cfg.init = InitRecipe::Forced;
      cfg.fraction = f;
      const State x = make_initial_state(cfg, s);
      REQUIRE(x.size() == 15);
      CHECK(state_average(x).frac() == f);
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        CHECK(x[i] >= cfg.lo);
        CHECK(x[i] <= cfg.hi);
        CHECK((x[i] * Rational(cfg.denominator)).is_integer());
      }
    }
  }
}

TEST_CASE("instances are reproducible and matched across cells") {
  ExperimentConfig cfg;
  cfg.n = 10;
  const Instance a = build_instance(cfg, 17);
  const Instance b = build_instance(cfg, 17);
  CHECK(a.graph == b.graph);
  CHECK(a.weights == b.weights);
  CHECK(a.x0 == b.x0);
  ExperimentConfig other = cfg;
  other.C = Rational(5);
  const Instance c = build_instance(other, 17);
  CHECK(c.graph == a.graph);
  CHECK(c.x0 == a.x0);
  CHECK(run_seed(cfg, 0) != run_seed(cfg, 1));
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.runs = 12;
  apply_setting(cfg, "p", "0.3,0.6");
  cfg.threads = 1;
  const SweepResult one = run_experiment(cfg);
  cfg.threads = 4;
  const SweepResult four = run_experiment(cfg);
  REQUIRE(one.runs.size() == 24);
  REQUIRE(four.runs.size() == 24);
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    CHECK(one.runs[i].seed == four.runs[i].seed);
    CHECK(one.runs[i].t_conv == four.runs[i].t_conv);
    CHECK(one.runs[i].x_ave == four.runs[i].x_ave);
    CHECK(verdict_kind(*one.runs[i].verdict) == verdict_kind(*four.runs[i].verdict));
  }
  std::stringstream a;
  std::stringstream b;
  write_sweep_csv(a, one);
  write_sweep_csv(b, four);
  CHECK(a.str() == b.str());
}

TEST_CASE("aggregate recomputes the cell statistics") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.runs = 10;
  cfg.init = InitRecipe::Forced;
  cfg.fraction = Rational(0);
  const SweepResult r = run_experiment(cfg);
  REQUIRE(r.cells.size() == 1);
  const SweepCell& cell = r.cells[0];
  CHECK(cell.runs == 10);
  CHECK(cell.completed + cell.failed == 10);
  CHECK(cell.consensus + cell.cycle + cell.undecided == cell.completed);
  Rational sum(0);
  for (const auto& run : r.runs) sum += Rational(run.t_conv);
  CHECK(cell.mean_t_conv == sum / Rational(10));
  const auto again = aggregate(cfg, r.runs);
  CHECK(again[0].mean_t_conv == cell.mean_t_conv);
  CHECK(again[0].max_deviation == cell.max_deviation);
  REQUIRE(cell.deviation_bound.has_value());
  CHECK(*cell.deviation_bound == Rational(1));
  CHECK(cell.within_bound);
  CHECK(cell.violations == 0);
}

TEST_CASE("sweep over C reports the 2/C bound per cell") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.runs = 6;
  cfg.init = InitRecipe::Forced;
  cfg.fraction = Rational(0);
  const std::vector<Rational> Cs{Rational(2), Rational(5)};
  const SweepResult r = sweep_C(cfg, Cs);
  REQUIRE(r.cells.size() == 2);
  CHECK(*r.cells[1].deviation_bound == Rational(2, 5));
  for (const auto& c : r.cells) CHECK(c.within_bound);
  const std::vector<Rational> low{Rational(1)};
  CHECK_THROWS_AS(sweep_C(cfg, low), Error);
}

TEST_CASE("artifacts are written") {
  const auto dir = std::filesystem::temp_directory_path() / "qcons_experiment_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.runs = 3;
  cfg.trace_sample = 2;
  cfg.output = dir.string();
  apply_setting(cfg, "C", "2,3");
  const SweepResult r = run_experiment(cfg);
  CHECK(std::filesystem::exists(dir / "sweep.csv"));
  for (int run = 0; run < 3; ++run) {
    const auto seed = std::to_string(run_seed(cfg, run));
    const auto json_path = dir / "runs" / (seed + ".json");
    REQUIRE(std::filesystem::exists(json_path));
    std::ifstream in(json_path);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.size() == 2);
    CHECK(j[0]["key"] == "C");
    const bool sampled = run < 2;
    CHECK(std::filesystem::exists(dir / "traces" / (seed + "_c0.csv")) == sampled);
    CHECK(std::filesystem::exists(dir / "traces" / (seed + "_c1.lyapunov.csv")) == sampled);
  }
  std::ifstream trace(dir / "traces" / (std::to_string(run_seed(cfg, 0)) + "_c0.csv"));
  const auto states = read_trace_csv(trace);
  CHECK(states.size() == r.runs[0].t_conv + 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invariant suite passes on a small seeded batch") {
  const VerifyReport v = verify_invariants(8, 16, 3, 2);
  for (const auto& f : v.failures) MESSAGE(f);
  CHECK(v.ok());
  CHECK(v.runs == 16);
  CHECK(v.consensus + v.cycle == 16);
}
