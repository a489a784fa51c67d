#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

#include "psc/ctl.hpp"
#include "psc/eg.hpp"
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

CounterSystem prepared_loop() {
  Budget b;
  return prepare(parse_system(kLoop), ApproxLabel::Precise, b);
}

// The loop restricted to the property window, with the complement of the
// window as the seed of bad states.
struct OverFixture {
  CounterSystem M1;
  Formula Y0;
  OverFixture()
      : M1(refine(parse_system(kLoop), parse_formula("x < 10"))),
        Y0(parse_formula("!(q = 0 && x >= 0 && x <= 9)")) {}
};

StateVector st(int q, Int x) { return StateVector{q, {{"x", x}}}; }

}  // namespace

TEST_CASE("grow1 finds the states whose every successor is bad") {
  OverFixture fx;
  Formula g1 = grow1(fx.M1, fx.Y0);
  CHECK(equivalent(g1, parse_formula("q = 0 && x = 9")));
  CHECK(state_satisfies(st(0, 9), g1));
  for (int x = 0; x <= 8; ++x) CHECK(!state_satisfies(st(0, x), g1));

  // nothing lies outside Y = everything
  CHECK(!is_satisfiable(grow1(fx.M1, f_true())));

  // with no bad states at all, grow1 is exactly the stuck set
  CHECK(equivalent(grow1(fx.M1, f_false()), stuck_states(fx.M1)));
}

TEST_CASE("branching census with at most one escape") {
  OverFixture fx;
  Formula am = atmost_one_succ_outside(fx.M1, fx.Y0);
  CHECK(equivalent(am, parse_formula("!(q = 0 && x >= 1 && x <= 4)")));
  CHECK(state_satisfies(st(0, 0), am));   // only the increment is enabled
  CHECK(state_satisfies(st(0, 7), am));   // decrement is disabled above 4
  CHECK(!state_satisfies(st(0, 3), am));  // both directions stay inside

  // a deterministic system always passes the census
  CounterSystem Det = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition up from 0 to 0 guard x >= 0 && x < 9 action x' = x + 1;
)");
  CHECK(equivalent(atmost_one_succ_outside(Det, f_false()), f_true()));

  // two identity branches: blocked unless one branch is already bad
  CounterSystem Fork = parse_system(R"(
counters x;
controls 0, 1, 2;
init: q = 0 && x = 0;
transition a from 0 to 1 guard true;
transition b from 0 to 2 guard true;
)");
  CHECK(!state_satisfies(st(0, 0), atmost_one_succ_outside(Fork, f_false())));
  CHECK(state_satisfies(st(0, 0),
                        atmost_one_succ_outside(Fork, parse_formula("q = 1"))));
}

TEST_CASE("grow2 collects the forced ramp") {
  OverFixture fx;
  bool degraded = true;
  Formula g2 = grow2(fx.M1, fx.Y0, Budget{}, &degraded);
  CHECK(!degraded);
  CHECK(equivalent(g2, parse_formula("q = 0 && x >= 5 && x <= 9")));

  // nothing outside Y = true, so nothing grows
  bool d2 = true;
  CHECK(!is_satisfiable(grow2(fx.M1, f_true(), Budget{}, &d2)));
  CHECK(!d2);
}

TEST_CASE("grow2 separates single dying rays from loops and forks") {
  // chain 0 -> 1 -> 2 -> 3(stuck): single trace that dies
  // 4: identity self-loop: single trace that never dies
  // 5 -> 6|7(stuck): a real fork
  CounterSystem M = parse_system(R"(
counters x;
controls 0, 1, 2, 3, 4, 5, 6, 7;
init: q = 0 && x = 0;
transition c01 from 0 to 1 guard true;
transition c12 from 1 to 2 guard true;
transition c23 from 2 to 3 guard true;
transition spin from 4 to 4 guard true;
transition f6 from 5 to 6 guard true;
transition f7 from 5 to 7 guard true;
)");
  bool degraded = true;
  Formula g2 = grow2(M, f_false(), Budget{}, &degraded);
  CHECK(!degraded);
  // the whole chain dies in finitely many forced steps
  CHECK(state_satisfies(st(0, 0), g2));
  CHECK(state_satisfies(st(1, 0), g2));
  CHECK(state_satisfies(st(2, 0), g2));
  // the self-loop never reaches the dying zone
  CHECK(!state_satisfies(st(4, 0), g2));
  // the fork has two live successors
  CHECK(!state_satisfies(st(5, 0), g2));
}

TEST_CASE("the over loop converges on the oscillation window in two rounds") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = compute_global_over(Mp, parse_formula("x < 10"), b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(r.stats.ni == 2);
  CHECK(equivalent(r.states, parse_formula("q = 0 && x >= 0 && x <= 4")));
  CHECK(r.stats.reach_tag == "exact");
}

TEST_CASE("a property holding everywhere converges immediately") {
  CounterSystem M = parse_system(R"(
counters x;
controls 0, 1;
init: q = 0 && x = 0;
reach: q = 0 && x >= 0 && x <= 9 || q = 1 && x >= 0 && x <= 9 exact;
transition up from 0 to 0 guard x >= 0 && x < 9 action x' = x + 1;
transition go from 0 to 1 guard true;
transition stay from 1 to 1 guard true;
)");
  Budget b;
  CheckResult r = compute_global_over(M, f_true(), b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(r.stats.ni == 1);
  CHECK(r.stats.snapshots.empty());
  CHECK(equivalent(r.states, M.reach_hint->formula));
}

TEST_CASE("intermediate bad sets stay closed under the step relation") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = compute_global_over(Mp, parse_formula("x < 10"), b);
  REQUIRE(!r.stats.snapshots.empty());
  CounterSystem M1 = refine(Mp, simplify(parse_formula("x < 10")));
  for (const auto& [name, Y] : r.stats.snapshots) {
    CHECK(name == "Y");
    CHECK(entails(post_image(M1, Y), Y));
  }
}

TEST_CASE("no state with an infinite good trace ever enters the bad set") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = compute_global_over(Mp, parse_formula("x < 10"), b);
  FiniteGraph G = explore(Mp, Mp.init);
  auto good = oracle_ctl(G, ctl_eg(ctl_prop(parse_formula("x < 10"))));
  for (const auto& [name, Y] : r.stats.snapshots)
    for (int i : good) CHECK(!state_satisfies(G.states[i], Y));
}

TEST_CASE("forced stops are labeled over and stay superset") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  b.max_iterations = 1;
  CheckResult r = compute_global_over(Mp, parse_formula("x < 10"), b);
  CHECK(r.label == ApproxLabel::Over);
  CHECK(entails(parse_formula("q = 0 && x >= 0 && x <= 4"), r.states));

  Budget hard;
  hard.max_iterations = 1;
  hard.no_premature_stop = true;
  CHECK_THROWS_AS(compute_global_over(Mp, parse_formula("x < 10"), hard),
                  BudgetExceededPrecise);
}
