#include <doctest.h>

#include <vector>

#include "qcons/error.hpp"
#include "qcons/grid.hpp"
#include "qcons/weights.hpp"

using namespace qcons;

TEST_CASE("gamma for two nodes with w12 = 1/4") {
  const WeightMatrix w = two_node_cyclic(Rational(3, 4));
  const std::vector<Rational> c0{Rational(0), Rational(0)};
  CHECK(compute_gamma(w, c0) == Rational(1, 8));
}

TEST_CASE("gamma for the 3-path under modified Metropolis C = 2") {
  const WeightMatrix w = modified_metropolis(path_graph(3), Rational(2));
  const std::vector<Rational> x0{Rational(0), Rational(1), Rational(2)};
  const GridConstants g = compute_grid_constants(w, x0);
  CHECK(compute_gamma(w, x0) == Rational(1, 12));
  CHECK(g.gamma == Rational(1, 12));
  for (const auto& B : g.B) CHECK(B == 6);
  for (const auto& D : g.D) CHECK(D == 6);
  CHECK(g.delta == Rational(1, 6));
  CHECK(g.beta() == Rational(1, 12));
  CHECK(g.alpha[1] == Rational(1, 3) + Rational(1, 12));
}

TEST_CASE("initial decimals refine the grid") {
  const WeightMatrix w = modified_metropolis(path_graph(3), Rational(2));
  const std::vector<Rational> x0{Rational(1, 7), Rational(1), Rational(2)};
  const GridConstants g = compute_grid_constants(w, x0);
  CHECK(g.D[0] == 42);
  CHECK(g.gamma == Rational(1, 84));
}

TEST_CASE("w_ii = 1/2 leaves no positive gamma") {
  const WeightMatrix w = two_node_cyclic(Rational(1, 2));
  const std::vector<Rational> c0{Rational(0), Rational(0)};
  try {
    compute_gamma(w, c0);
    FAIL("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AssumptionViolated);
  }
}

TEST_CASE("alpha stays in (0, 1/2 - gamma] and below 1/C for modified Metropolis") {
  for (const Rational C : {Rational(2), Rational(5, 2), Rational(3), Rational(10)}) {
    for (int n : {2, 3, 5, 8}) {
      const Graph g = complete_graph(n);
      const WeightMatrix w = modified_metropolis(g, C);
      std::vector<Rational> x0;
      for (int i = 0; i < n; ++i) x0.push_back(Rational(Integer(i * 37 + 3), Integer(100)));
      const GridConstants k = compute_grid_constants(w, x0);
      for (const auto& a : k.alpha) {
        CHECK(a.sign() > 0);
        CHECK(a <= Rational(1, 2) - k.gamma);
      }
      CHECK(k.alpha_max() <= Rational(1) / C);
    }
  }
}
