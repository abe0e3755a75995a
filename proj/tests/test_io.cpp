#include <doctest.h>

#include <sstream>
#include <variant>

#include "qcons/error.hpp"
#include "qcons/io.hpp"
#include "qcons/weights.hpp"

using namespace qcons;

TEST_CASE("trace CSV round trip") {
  const Graph g = path_graph(3);
  const WeightMatrix w = modified_metropolis(g, Rational(2));
  const Trace t = simulate(g, w, QuantizerKind{}, State{Rational(-1, 3), Rational(1), Rational(27, 10)});
  std::stringstream ss;
  write_trace_csv(ss, t.states);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "k,i,x_num,x_den,floor_x");
  ss.seekg(0);
  const auto back = read_trace_csv(ss);
  REQUIRE(back.size() == t.states.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].k == t.states[k].k);
    CHECK(back[k].x == t.states[k].x);
  }
}

TEST_CASE("malformed trace rows are rejected") {
  std::stringstream missing("k,i,x_num,x_den,floor_x\n0,0,1,2,0\n0,2,1,2,0\n");
  CHECK_THROWS_AS(read_trace_csv(missing), Error);
  std::stringstream bad_floor("k,i,x_num,x_den,floor_x\n0,0,1,2,1\n");
  CHECK_THROWS_AS(read_trace_csv(bad_floor), Error);
  std::stringstream junk("k,i,x_num,x_den,floor_x\n0,0,a,2,0\n");
  CHECK_THROWS_AS(read_trace_csv(junk), Error);
}

TEST_CASE("verdict JSON round trip") {
  const Verdict a = QuantizedConsensus{12, Rational(1)};
  const Verdict b = Cycle{3, 2};
  const Verdict c = Undecided{1000};
  const auto ja = verdict_to_json(a);
  CHECK(ja["kind"] == "QuantizedConsensus");
  CHECK(ja["k0"] == 12);
  CHECK(ja["level"] == "1");
  CHECK(verdict_to_json(b)["period"] == 2);
  for (const Verdict& v : {a, b, c}) {
    const Verdict back = verdict_from_json(verdict_to_json(v));
    CHECK(verdict_kind(back) == verdict_kind(v));
    CHECK(terminal_time(back) == terminal_time(v));
  }
  CHECK(std::get<QuantizedConsensus>(verdict_from_json(verdict_to_json(QuantizedConsensus{1, Rational(5, 2)}))).level ==
        Rational(5, 2));
  CHECK_THROWS_AS(verdict_from_json(nlohmann::json{{"kind", "Nope"}}), Error);
}
