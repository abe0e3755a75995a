#include <doctest.h>

#include <sstream>
#include <vector>

#include "qcons/error.hpp"
#include "qcons/weights.hpp"

using namespace qcons;

namespace {

bool has_rule(const AssumptionReport& r, AssumptionRule rule, NodeId i) {
  for (const auto& v : r.violations) {
    if (v.rule == rule && v.i == i) return true;
  }
  return false;
}

bool has_rule(const AssumptionReport& r, AssumptionRule rule) {
  for (const auto& v : r.violations) {
    if (v.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("Metropolis on the 3-path") {
  const WeightMatrix w = metropolis(path_graph(3));
  CHECK(w.at(0, 1) == Rational(1, 3));
  CHECK(w.at(1, 2) == Rational(1, 3));
  CHECK(w.at(0, 2) == Rational(0));
  CHECK(w.diag(0) == Rational(2, 3));
  CHECK(w.diag(1) == Rational(1, 3));
  CHECK(w.diag(2) == Rational(2, 3));
  CHECK(is_row_stochastic(w));
  CHECK(is_column_stochastic(w));
  // w_22 = 1/3 breaks the dominant-diagonal rule.
  const auto report = validate_assumption1(w, path_graph(3));
  CHECK(has_rule(report, AssumptionRule::DominantDiagonal, 1));
}

TEST_CASE("Metropolis and modified Metropolis on K2") {
  const WeightMatrix m = metropolis(path_graph(2));
  CHECK(m.at(0, 1) == Rational(1, 2));
  CHECK(m.diag(0) == Rational(1, 2));
  const WeightMatrix mm = modified_metropolis(path_graph(2), Rational(2));
  CHECK(mm.at(0, 1) == Rational(1, 4));
  CHECK(mm.diag(0) == Rational(3, 4));
  CHECK(mm.diag(1) == Rational(3, 4));
  CHECK(validate_assumption1(mm, path_graph(2)).satisfied());
}

TEST_CASE("modified Metropolis on the 3-path") {
  const Graph g = path_graph(3);
  const WeightMatrix w = modified_metropolis(g, Rational(2));
  CHECK(w.at(0, 1) == Rational(1, 6));
  CHECK(w.at(1, 2) == Rational(1, 6));
  CHECK(w.diag(0) == Rational(5, 6));
  CHECK(w.diag(1) == Rational(2, 3));
  CHECK(w.diag(2) == Rational(5, 6));
  CHECK(validate_assumption1(w, g).satisfied());
}

TEST_CASE("modified Metropolis satisfies the assumption on random graphs") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Graph g = erdos_renyi(12, 0.3, s);
    for (const Rational C : {Rational(2), Rational(3), Rational(7, 2)}) {
      const WeightMatrix w = modified_metropolis(g, C);
      CHECK(validate_assumption1(w, g).satisfied());
      for (NodeId i = 0; i < g.size(); ++i) CHECK(w.off_diagonal_sum(i) < Rational(1) / C);
    }
  }
}

TEST_CASE("C below 2 is rejected") {
  try {
    modified_metropolis(path_graph(3), Rational(3, 2));
    FAIL("expected ParameterOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParameterOutOfRange);
  }
}

TEST_CASE("the two-node cyclic matrix fails the dominant diagonal at both nodes") {
  const WeightMatrix w = two_node_cyclic(Rational(1, 25));
  CHECK(w.diag(0) == Rational(1, 25));
  CHECK(w.at(0, 1) == Rational(24, 25));
  const auto report = validate_assumption1(w, path_graph(2));
  CHECK_FALSE(report.satisfied());
  CHECK(has_rule(report, AssumptionRule::DominantDiagonal, 0));
  CHECK(has_rule(report, AssumptionRule::DominantDiagonal, 1));
  CHECK(report.summary().find("DominantDiagonal") != std::string::npos);
}

TEST_CASE("asymmetric, off-graph and non-stochastic matrices are reported") {
  const Graph g = path_graph(3);
  const std::vector<WeightMatrix::Triplet> asym{
      {0, 0, Rational(3, 4)}, {0, 1, Rational(1, 4)}, {1, 0, Rational(1, 8)},
      {1, 1, Rational(3, 4)}, {1, 2, Rational(1, 8)}, {2, 1, Rational(1, 4)},
      {2, 2, Rational(3, 4)}};
  const auto r1 = validate_assumption1(WeightMatrix::from_triplets(3, asym), g);
  CHECK(has_rule(r1, AssumptionRule::Symmetry));

  const std::vector<WeightMatrix::Triplet> off_graph{
      {0, 0, Rational(3, 4)}, {0, 2, Rational(1, 4)}, {2, 0, Rational(1, 4)},
      {1, 1, Rational(1)}, {2, 2, Rational(3, 4)}};
  const auto r2 = validate_assumption1(WeightMatrix::from_triplets(3, off_graph), g);
  CHECK(has_rule(r2, AssumptionRule::Sparsity));

  const std::vector<WeightMatrix::Triplet> heavy{
      {0, 0, Rational(4, 5)}, {0, 1, Rational(1, 4)}, {1, 0, Rational(1, 4)},
      {1, 1, Rational(3, 4)}};
  const auto r3 = validate_assumption1(WeightMatrix::from_triplets(2, heavy), path_graph(2));
  CHECK(has_rule(r3, AssumptionRule::DoublyStochastic));
}

TEST_CASE("uniform self weight on a regular graph") {
  const Graph k2 = path_graph(2);
  CHECK(uniform_self_weight(k2, Rational(1, 25)) == two_node_cyclic(Rational(1, 25)));
  const Graph b = complete_bipartite_regular(2, 2);
  const WeightMatrix w = uniform_self_weight(b, Rational(1, 10));
  CHECK(w.at(0, 2) == Rational(9, 20));
  CHECK(is_row_stochastic(w));
  CHECK_THROWS_AS(uniform_self_weight(path_graph(3), Rational(1, 2)), Error);
}

TEST_CASE("weight file round trip is exact") {
  const Graph g = erdos_renyi(9, 0.4, 3);
  const WeightMatrix w = modified_metropolis(g, Rational(5, 2));
  std::stringstream ss;
  write_weights(ss, w);
  CHECK(read_weights(ss) == w);
  std::stringstream bad("2\n0 0 1/2\n0 1 x\n");
  CHECK_THROWS_AS(read_weights(bad), Error);
}
