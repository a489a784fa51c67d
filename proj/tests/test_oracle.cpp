#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "psc/ctl.hpp"
#include "psc/oracle.hpp"
#include "psc/system.hpp"

using namespace psc;

namespace {

const char* kLoop = R"(
counters x;
controls 0;
init: x = 0;
transition t0 from 0 to 0 guard x >= 0 && x < 100 action x' = x + 1;
transition t1 from 0 to 0 guard x > 0 && x < 5 action x' = x - 1;
)";

StateVector st(int q, Int x) { return StateVector{q, {{"x", x}}}; }

std::set<Int> xs_of(const FiniteGraph& G, const std::set<int>& idx) {
  std::set<Int> out;
  for (int i : idx)
    if (G.states[i].control == 0) out.insert(G.states[i].vals.at("x"));
  return out;
}

std::set<Int> range_set(int lo, int hi) {
  std::set<Int> out;
  for (int v = lo; v <= hi; ++v) out.insert(v);
  return out;
}

}  // namespace

TEST_CASE("concrete successor enumeration") {
  CounterSystem M = parse_system(kLoop);
  auto s0 = concrete_successors(M, st(0, 0));
  REQUIRE(s0.size() == 1);
  CHECK(s0[0] == st(0, 1));

  auto s3 = concrete_successors(M, st(0, 3));
  REQUIRE(s3.size() == 2);
  CHECK(std::count(s3.begin(), s3.end(), st(0, 4)) == 1);
  CHECK(std::count(s3.begin(), s3.end(), st(0, 2)) == 1);

  CHECK(concrete_successors(M, st(0, 100)).empty());

  CounterSystem R = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition pick from 0 to 0 guard x = 0 action 2 <= x' <= 6;
)");
  auto sr = concrete_successors(R, st(0, 0));
  CHECK(sr.size() == 5);
  CHECK_THROWS_AS(concrete_successors(R, st(0, 0), 3), CapExceeded);
}

TEST_CASE("explore builds the reachable graph") {
  CounterSystem M = parse_system(kLoop);
  FiniteGraph G = explore(M, M.init);
  CHECK(G.complete);
  CHECK(G.states.size() == 101);
  CHECK(xs_of(G, oracle_sat_set(G, f_true())) == range_set(0, 100));
  CHECK(G.find(st(0, 5)) >= 0);
  CHECK(G.find(st(0, 101)) == -1);
  CHECK(G.find(st(1, 0)) == -1);

  // successor lists follow transition order
  int i3 = G.find(st(0, 3));
  REQUIRE(i3 >= 0);
  REQUIRE(G.succs[i3].size() == 2);
  CHECK(G.states[G.succs[i3][0]] == st(0, 4));
  CHECK(G.states[G.succs[i3][1]] == st(0, 2));

  FiniteGraph empty = explore(M, f_false());
  CHECK(empty.states.empty());
  CHECK(empty.complete);

  FiniteGraph chain = explore(M, parse_formula("q = 0 && x = 95"));
  CHECK(chain.states.size() == 6);
}

TEST_CASE("explore enforces its cap") {
  CounterSystem M = parse_system(kLoop);
  CHECK_THROWS_AS(explore(M, M.init, 10), CapExceeded);
  // a seed with infinitely many models cannot be enumerated
  CHECK_THROWS_AS(explore(M, parse_formula("q = 0 && x >= 0")), CapExceeded);
}

TEST_CASE("oracle satisfaction sets") {
  CounterSystem M = parse_system(kLoop);
  FiniteGraph G = explore(M, M.init);
  CHECK(xs_of(G, oracle_sat_set(G, parse_formula("x <= 4"))) == range_set(0, 4));
  CHECK(oracle_sat_set(G, f_false()).empty());
}

TEST_CASE("oracle CTL on the one-loop graph") {
  CounterSystem M = parse_system(kLoop);
  FiniteGraph G = explore(M, M.init);

  CtlFormula eg = ctl_eg(ctl_prop(parse_formula("x < 10")));
  CHECK(xs_of(G, oracle_ctl(G, eg)) == range_set(0, 4));

  CtlFormula ef4 = ctl_ef(ctl_prop(parse_formula("x = 4")));
  CHECK(xs_of(G, oracle_ctl(G, ef4)) == range_set(0, 4));

  CtlFormula ex0 = ctl_ex(ctl_prop(parse_formula("x = 0")));
  CHECK(xs_of(G, oracle_ctl(G, ex0)) == std::set<Int>{1});

  // E[phi1 U phi2] contains sat(phi2)
  CtlFormula eu = ctl_eu(ctl_prop(parse_formula("x >= 2")),
                         ctl_prop(parse_formula("x = 7")));
  auto eu_set = oracle_ctl(G, eu);
  for (int i : oracle_sat_set(G, parse_formula("x = 7")))
    CHECK(eu_set.count(i) == 1);
  CHECK(xs_of(G, eu_set) == range_set(2, 7));

  CHECK(xs_of(G, oracle_ctl(G, ctl_not(eg))) == range_set(5, 100));
  CHECK(xs_of(G, oracle_ctl(G, ctl_or(eg, ex0))) == range_set(0, 4));

  // on the stuck-completed system every state heads an infinite trace
  CounterSystem C = complete_stuck(M);
  FiniteGraph GC = explore(C, C.init);
  CHECK(oracle_ctl(GC, ctl_eg(ctl_prop(f_true()))).size() == GC.states.size());
  // but in the raw system anything above 4 is forced into the stuck state
  CHECK(xs_of(G, oracle_ctl(G, ctl_eg(ctl_prop(f_true())))) == range_set(0, 4));
}

TEST_CASE("oracle exact-step predecessors") {
  CounterSystem M = parse_system(kLoop);
  FiniteGraph G = explore(M, M.init);
  Formula x4 = parse_formula("x = 4");
  CHECK(xs_of(G, oracle_pre_k(G, x4, 0)) == std::set<Int>{4});
  // 5 -> 4 is not a step: the decrement guard needs x < 5 at the source
  CHECK(xs_of(G, oracle_pre_k(G, x4, 1)) == std::set<Int>{3});
  CHECK(xs_of(G, oracle_pre_k(G, x4, 2)) == std::set<Int>{2, 4});
}

TEST_CASE("oracle reachability closures") {
  CounterSystem M = parse_system(kLoop);
  FiniteGraph G = explore(M, M.init);
  CHECK(xs_of(G, oracle_pre_star(G, parse_formula("x <= 4"))) == range_set(0, 4));
  CHECK(xs_of(G, oracle_pre_star(G, parse_formula("x = 50"))) == range_set(0, 50));
  CHECK(xs_of(G, oracle_post_star(G, parse_formula("x = 98"))) == range_set(98, 100));
  CHECK(xs_of(G, oracle_post_star(G, M.init)) == range_set(0, 100));
}
