#include <doctest.h>

#include <variant>
#include <vector>

#include "qcons/dynamics.hpp"
#include "qcons/error.hpp"
#include "qcons/weights.hpp"

using namespace qcons;

namespace {

// Dense reference: x' = x + (W - I) Q(x).
State dense_step(const WeightMatrix& w, const QuantizerKind& kind, const State& x) {
  const int n = w.size();
  State out(x);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Rational a = w.at(i, j) - (i == j ? Rational(1) : Rational(0));
      out[i] += a * quantize(kind, x[j]);
    }
  }
  return out;
}

State dense_linear(const WeightMatrix& w, const State& x) {
  const int n = w.size();
  State out(n, Rational(0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out[i] += w.at(i, j) * x[j];
  }
  return out;
}

const QuantizerKind kTrunc{};

}  // namespace

TEST_CASE("single update on two nodes") {
  const WeightMatrix w = two_node_cyclic(Rational(1, 25));
  Quantizer q(kTrunc);
  const State x{Rational(3, 10), Rational(53, 10)};
  CHECK(step(w, q, x) == State{Rational(51, 10), Rational(5, 10)});
}

TEST_CASE("single update on the 3-path with C = 2") {
  const WeightMatrix w = modified_metropolis(path_graph(3), Rational(2));
  Quantizer q(kTrunc);
  const State x{Rational(0), Rational(1), Rational(2)};
  CHECK(step(w, q, x) == State{Rational(1, 6), Rational(1), Rational(11, 6)});
  CHECK(step(w, q, x) == dense_step(w, kTrunc, x));
}

TEST_CASE("sparse engine agrees with the dense reference") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Graph g = erdos_renyi(8, 0.4, s);
    const WeightMatrix w = modified_metropolis(g, Rational(3));
    Rng rng(s);
    State x;
    for (int i = 0; i < 8; ++i) x.emplace_back(Integer(rng.uniform_int(-500, 500)), Integer(100));
    for (const QuantizerKind& k : {kTrunc, QuantizerKind{QuantizerVariant::Ceiling},
                                   QuantizerKind{QuantizerVariant::Rounding, Rational(1, 2)}}) {
      Quantizer q(k);
      State a = x;
      State b = x;
      for (int t = 0; t < 10; ++t) {
        a = step(w, q, a);
        b = dense_step(w, k, b);
      }
      CHECK(a == b);
    }
  }
}

TEST_CASE("equal floors are a fixed point") {
  const WeightMatrix w = modified_metropolis(complete_graph(4), Rational(2));
  Quantizer q(kTrunc);
  const State x{Rational(21, 10), Rational(2), Rational(29, 10), Rational(5, 2)};
  CHECK(step(w, q, x) == x);
}

TEST_CASE("the naive variant does not conserve the sum") {
  const WeightMatrix w = metropolis(path_graph(2));
  Quantizer q(kTrunc);
  const State x{Rational(1, 2), Rational(3, 2)};
  const State y = naive_quantized_step(w, q, x);
  CHECK(y == State{Rational(3, 4), Rational(3, 4)});
  CHECK(state_sum(y) != state_sum(x));
}

TEST_CASE("unquantized iteration") {
  const WeightMatrix k2 = metropolis(path_graph(2));
  const auto a = simulate_linear(k2, State{Rational(0), Rational(1)}, 3);
  REQUIRE(a.size() == 4);
  CHECK(a[1] == State{Rational(1, 2), Rational(1, 2)});
  CHECK(a[3] == a[1]);

  const WeightMatrix p3 = metropolis(path_graph(3));
  const State x0{Rational(0), Rational(0), Rational(3)};
  const auto b = simulate_linear(p3, x0, 5);
  State ref = x0;
  for (int k = 1; k <= 5; ++k) {
    ref = dense_linear(p3, ref);
    CHECK(b[k] == ref);
  }
  const auto approx = simulate_linear_approx(p3, {0.0, 0.0, 3.0}, 5);
  for (int i = 0; i < 3; ++i) CHECK(approx[5][i] == doctest::Approx(ref[i].to_double()));
}

TEST_CASE("two-node toggle: closed form and period 2") {
  const WeightMatrix w = two_node_cyclic(Rational(1, 25));
  const Rational K(5);
  const Rational xi(3, 10);
  SimOptions opt;
  opt.force = true;
  const Trace t = simulate(path_graph(2), w, kTrunc, State{K + xi, xi}, opt);
  const auto* c = std::get_if<Cycle>(&t.verdict);
  REQUIRE(c != nullptr);
  CHECK(c->period == 2);
  CHECK(c->t_conv == 0);
  Quantizer q(kTrunc);
  State x{K + xi, xi};
  const Rational a = w.diag(0);
  for (int k = 1; k <= 6; ++k) {
    x = step(w, q, x);
    // x1(k) = K + xi - k(1-a)K while the toggle holds, here (1-a)K = 24/5.
    if (k % 2 == 1) {
      CHECK(x[0] == K + xi - (Rational(1) - a) * K);
      CHECK(x[1] == xi + (Rational(1) - a) * K);
    } else {
      CHECK(x[0] == K + xi);
      CHECK(x[1] == xi);
    }
  }
  CHECK_FALSE(t.assumption_satisfied);
}

TEST_CASE("refuses weights that fail the assumption unless forced") {
  const WeightMatrix w = two_node_cyclic(Rational(1, 25));
  try {
    simulate(path_graph(2), w, kTrunc, State{Rational(1), Rational(0)});
    FAIL("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AssumptionViolated);
  }
}

TEST_CASE("3-path reaches quantized consensus and conserves the sum") {
  const Graph g = path_graph(3);
  const WeightMatrix w = modified_metropolis(g, Rational(2));
  const State x0{Rational(0), Rational(1), Rational(2)};
  const Rational total = state_sum(x0);
  SimOptions opt;
  opt.observer = [&](std::uint64_t, const State& x) { CHECK(state_sum(x) == total); };
  const Trace t = simulate(g, w, kTrunc, x0, opt);
  const auto* qc = std::get_if<QuantizedConsensus>(&t.verdict);
  REQUIRE(qc != nullptr);
  CHECK(qc->level == Rational(1));
  CHECK(t.states.size() == t.last_k + 1);
  for (const Rational& v : t.states.back().x) CHECK(v.floor() == 1);
  CHECK(infer_verdict(std::vector<State>{t.terminal}, kTrunc).index() == 0);
}

TEST_CASE("record policies and budget") {
  const Graph g = path_graph(3);
  const WeightMatrix w = modified_metropolis(g, Rational(2));
  const State x0{Rational(0), Rational(1), Rational(2)};
  SimOptions opt;
  opt.record = RecordPolicy::none();
  const Trace none = simulate(g, w, kTrunc, x0, opt);
  CHECK(none.states.empty());
  opt.record = RecordPolicy::every(5);
  const Trace sparse = simulate(g, w, kTrunc, x0, opt);
  for (const auto& s : sparse.states) CHECK((s.k % 5 == 0 || s.k == sparse.last_k));
  opt.record = RecordPolicy::full();
  opt.max_iters = 2;
  const Trace short_run = simulate(g, w, kTrunc, x0, opt);
  CHECK(std::holds_alternative<Undecided>(short_run.verdict));
  CHECK_FALSE(is_decided(short_run.verdict));
}

TEST_CASE("an exact repeat after a transient is a cycle with the right t_conv") {
  const Graph g = complete_bipartite_regular(2, 2);
  const WeightMatrix w = uniform_self_weight(g, Rational(1, 10));
  SimOptions opt;
  opt.force = true;
  const State x0{Rational(0), Rational(0), Rational(10), Rational(10)};
  const Trace t = simulate(g, w, kTrunc, x0, opt);
  REQUIRE(is_decided(t.verdict));
  if (const auto* c = std::get_if<Cycle>(&t.verdict)) {
    REQUIRE(c->period >= 1);
    const auto& s = t.states;
    CHECK(s[c->t_conv].x == s[c->t_conv + c->period].x);
    for (std::uint64_t p = 1; p < c->period; ++p) CHECK(s[c->t_conv].x != s[c->t_conv + p].x);
    if (c->t_conv > 0) CHECK(s[c->t_conv - 1].x != s[c->t_conv - 1 + c->period].x);
  }
}
