#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

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

const char* kReach = "q = 0 && x >= 0 && x <= 100 || q = 1 && x = 100";

CounterSystem prepared_loop(Stats* st = nullptr) {
  Budget b;
  return prepare(parse_system(kLoop), ApproxLabel::Precise, b, st);
}

void check_against_oracle(const CounterSystem& Mp, const FiniteGraph& G,
                          const CtlFormula& psi, const Formula& got) {
  auto want = oracle_ctl(G, psi);
  for (int i = 0; i < (int)G.states.size(); ++i)
    CHECK_MESSAGE(state_satisfies(G.states[i], got) == (want.count(i) == 1),
                  to_string(G.states[i]), " on ", print_property(psi));
}

}  // namespace

TEST_CASE("label lattice") {
  CHECK(lattice_join(ApproxLabel::Precise, ApproxLabel::Over) == ApproxLabel::Over);
  CHECK(lattice_join(ApproxLabel::Under, ApproxLabel::Precise) == ApproxLabel::Under);
  CHECK(lattice_join(ApproxLabel::Under, ApproxLabel::Under) == ApproxLabel::Under);
  CHECK_THROWS_AS(lattice_join(ApproxLabel::Under, ApproxLabel::Over), LabelConflict);
  CHECK(lattice_negate(ApproxLabel::Under) == ApproxLabel::Over);
  CHECK(lattice_negate(lattice_negate(ApproxLabel::Over)) == ApproxLabel::Over);
  CHECK(lattice_negate(ApproxLabel::Precise) == ApproxLabel::Precise);
  CHECK(to_string(ApproxLabel::Precise) == "precise");
}

TEST_CASE("boolean connectives fold into state formulas") {
  CtlFormula a = ctl_prop(parse_formula("x >= 0"));
  CtlFormula b = ctl_prop(parse_formula("x <= 5"));
  CtlFormula both = ctl_and(a, b);
  REQUIRE(both->op == CtlOp::Prop);
  CHECK(equivalent(both->prop, parse_formula("x >= 0 && x <= 5")));

  CtlFormula neg = ctl_not(a);
  REQUIRE(neg->op == CtlOp::Prop);
  CHECK(equivalent(neg->prop, parse_formula("x < 0")));

  CtlFormula either = ctl_or(a, b);
  REQUIRE(either->op == CtlOp::Prop);

  // no folding across temporal operators
  CHECK(ctl_not(ctl_eg(a))->op == CtlOp::Not);
  CHECK(ctl_or(ctl_ex(a), b)->op == CtlOp::Or);
}

TEST_CASE("universal operators desugar to the existential core") {
  CtlFormula p = ctl_prop(parse_formula("x = 1"));

  CtlFormula ef = ctl_ef(p);
  REQUIRE(ef->op == CtlOp::EU);
  CHECK(is_true(ef->a->prop));

  CtlFormula ax = ctl_ax(p);
  REQUIRE(ax->op == CtlOp::Not);
  REQUIRE(ax->a->op == CtlOp::EX);
  CHECK(ax->a->a->op == CtlOp::Prop);

  CtlFormula ag = ctl_ag(p);
  REQUIRE(ag->op == CtlOp::Not);
  CHECK(ag->a->op == CtlOp::EU);

  CtlFormula af = ctl_af(p);
  REQUIRE(af->op == CtlOp::Not);
  CHECK(af->a->op == CtlOp::EG);

  CtlFormula au = ctl_au(ctl_prop(parse_formula("x >= 0")), p);
  REQUIRE(au->op == CtlOp::Not);
  REQUIRE(au->a->op == CtlOp::Or);
  CHECK(au->a->a->op == CtlOp::EU);
  CHECK(au->a->b->op == CtlOp::EG);
}

TEST_CASE("property parsing and printing") {
  CtlFormula eg = parse_property("EG (x < 10)");
  REQUIRE(eg->op == CtlOp::EG);
  CHECK(eg->a->op == CtlOp::Prop);

  CtlFormula eu = parse_property("E [ x >= 0 U x = 4 ]");
  REQUIRE(eu->op == CtlOp::EU);

  CtlFormula au = parse_property("A [ x >= 0 U x = 3 ]");
  CHECK(au->op == CtlOp::Not);

  CtlFormula mix = parse_property("! EG (x < 10) || EX (x = 1)");
  REQUIRE(mix->op == CtlOp::Or);
  CHECK(mix->a->op == CtlOp::Not);
  CHECK(mix->b->op == CtlOp::EX);

  CtlFormula imp = parse_property("x = 0 -> EF (q = 1)");
  CHECK(imp->op == CtlOp::Or);

  // print/parse closes on itself
  for (const char* s : {"EG (x < 10)", "E [ x >= 0 U x = 4 ]",
                        "! EX (x = 1 && q = 0)", "AG (x >= 0)",
                        "AF (x = 5 || x = 6)", "A [ x <= 9 U q = 1 ]"}) {
    std::string once = print_property(parse_property(s));
    CHECK(print_property(parse_property(once)) == once);
  }

  CHECK_THROWS_AS(parse_property("EG x <"), ParseError);
  CHECK_THROWS_AS(parse_property("E [ x U ]"), ParseError);
}

TEST_CASE("property depth counts temporal operators") {
  CHECK(property_depth(parse_property("x = 0 && x <= 9")) == 0);
  CHECK(property_depth(parse_property("EG (x < 10)")) == 1);
  CHECK(property_depth(parse_property("EX EG (x < 10)")) == 2);
  CHECK(property_depth(parse_property("E [ EX (x = 1) U EG (x = 2) ]")) == 2);
}

TEST_CASE("prepare resolves reachability") {
  Stats st;
  CounterSystem Mp = prepared_loop(&st);
  REQUIRE(Mp.reach_hint.has_value());
  CHECK(Mp.reach_hint->tag == ReachTag::Exact);
  CHECK(equivalent(Mp.reach_hint->formula, parse_formula(kReach)));
  CHECK(st.reach_tag == "exact");
  // no reachable state of the prepared system is stuck
  CHECK(!is_satisfiable(f_and(stuck_states(Mp), Mp.reach_hint->formula)));

  // an existing hint is kept rather than recomputed
  CounterSystem H = parse_system(R"(
counters x;
controls 0;
init: x = 0;
reach: q = 0 && x >= 0 exact;
transition up from 0 to 0 guard x >= 0 action x' = x + 1;
)");
  Budget b;
  Stats st2;
  CounterSystem Hp = prepare(H, ApproxLabel::Precise, b, &st2);
  REQUIRE(Hp.reach_hint.has_value());
  CHECK(st2.reach_tag == "exact");
  CHECK(entails(parse_formula("q = 0 && x >= 3"), Hp.reach_hint->formula));
}

TEST_CASE("prepare raises when a precise reach pass cannot finish") {
  CounterSystem M = parse_system(kLoop);
  Budget b;
  b.wall_limit = std::chrono::milliseconds(0);
  CHECK_THROWS_AS(prepare(M, ApproxLabel::Precise, b), BudgetExceededPrecise);
  // an approximate request degrades instead of throwing
  Budget b2;
  b2.wall_limit = std::chrono::milliseconds(0);
  CounterSystem Mo = prepare(M, ApproxLabel::Over, b2);
  CHECK(Mo.controls.size() == 2);
}

TEST_CASE("plain state properties intersect the reachable envelope") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = sat(Mp, ctl_prop(f_true()), ApproxLabel::Precise, b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(equivalent(r.states, parse_formula(kReach)));

  CheckResult h = sat(Mp, ctl_prop(parse_formula("x >= 40 && x <= 200")),
                      ApproxLabel::Precise, b);
  CHECK(equivalent(h.states, parse_formula("q = 0 && x >= 40 && x <= 100 || "
                                           "q = 1 && x = 100")));
}

TEST_CASE("EG through the driver") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = sat(Mp, parse_property("EG (x < 10)"), ApproxLabel::Precise, b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(equivalent(r.states, parse_formula("q = 0 && x >= 0 && x <= 4")));
}

TEST_CASE("negation complements within reach") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult r = sat(Mp, parse_property("! EG (x < 10)"), ApproxLabel::Precise, b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(equivalent(r.states, parse_formula("q = 0 && x >= 5 && x <= 100 || "
                                           "q = 1 && x = 100")));
  FiniteGraph G = explore(Mp, Mp.init);
  check_against_oracle(Mp, G, parse_property("! EG (x < 10)"), r.states);
}

TEST_CASE("EX and EU through the driver agree with the oracle") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  FiniteGraph G = explore(Mp, Mp.init);

  CheckResult ex = sat(Mp, parse_property("EX (x = 0)"), ApproxLabel::Precise, b);
  CHECK(ex.label == ApproxLabel::Precise);
  CHECK(equivalent(ex.states, parse_formula("q = 0 && x = 1")));
  check_against_oracle(Mp, G, parse_property("EX (x = 0)"), ex.states);

  CheckResult eu = sat(Mp, parse_property("E [ x >= 2 U x = 7 ]"),
                       ApproxLabel::Precise, b);
  CHECK(eu.label == ApproxLabel::Precise);
  check_against_oracle(Mp, G, parse_property("E [ x >= 2 U x = 7 ]"), eu.states);

  CheckResult ef = sat(Mp, parse_property("EF (x = 100)"), ApproxLabel::Precise, b);
  check_against_oracle(Mp, G, parse_property("EF (x = 100)"), ef.states);

  CheckResult deep = sat(Mp, parse_property("EX EG (x < 10)"),
                         ApproxLabel::Precise, b);
  check_against_oracle(Mp, G, parse_property("EX EG (x < 10)"), deep.states);
}

TEST_CASE("compute_until endpoints") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  FiniteGraph G = explore(Mp, Mp.init);

  CheckResult r = compute_until(Mp, f_true(), parse_formula("x = 4"),
                                ApproxLabel::Precise, b);
  CHECK(r.label == ApproxLabel::Precise);
  auto want = oracle_ctl(G, ctl_eu(ctl_prop(f_true()), ctl_prop(parse_formula("x = 4"))));
  for (int i = 0; i < (int)G.states.size(); ++i)
    CHECK(state_satisfies(G.states[i], r.states) == (want.count(i) == 1));

  CheckResult none = compute_until(Mp, parse_formula("x >= 0"), f_false(),
                                   ApproxLabel::Precise, b);
  CHECK(none.label == ApproxLabel::Precise);
  CHECK(!is_satisfiable(none.states));

  CheckResult seed = compute_until(Mp, f_false(), parse_formula("q = 0 && x = 4"),
                                   ApproxLabel::Precise, b);
  CHECK(seed.label == ApproxLabel::Precise);
  CHECK(equivalent(seed.states, parse_formula("q = 0 && x = 4")));
}

TEST_CASE("engine override is observable in the stats") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  CheckResult over = sat(Mp, parse_property("EG (x < 10)"), ApproxLabel::Precise,
                         b, EngineOverride::Over);
  CHECK(over.label == ApproxLabel::Precise);
  CHECK(over.stats.ni > 0);
  CHECK(over.stats.fl == 0);

  CheckResult under = sat(Mp, parse_property("EG (x < 10)"), ApproxLabel::Precise,
                          b, EngineOverride::Under);
  CHECK(under.label == ApproxLabel::Precise);
  CHECK(under.stats.fl > 0);
  CHECK(equivalent(under.states, over.states));
}

TEST_CASE("requested labels bound the result label") {
  CounterSystem Mp = prepared_loop();
  Budget b;
  for (ApproxLabel want : {ApproxLabel::Precise, ApproxLabel::Under, ApproxLabel::Over}) {
    CheckResult r = sat(Mp, parse_property("EG (x < 10)"), want, b);
    if (want == ApproxLabel::Precise) CHECK(r.label == ApproxLabel::Precise);
    if (want == ApproxLabel::Under)
      CHECK((r.label == ApproxLabel::Precise || r.label == ApproxLabel::Under));
    if (want == ApproxLabel::Over)
      CHECK((r.label == ApproxLabel::Precise || r.label == ApproxLabel::Over));
  }
}

TEST_CASE("a precise run out of wall clock aborts loudly") {
  CounterSystem M = parse_system(kLoop);
  Budget b;
  b.wall_limit = std::chrono::milliseconds(0);
  b.no_premature_stop = true;
  CHECK_THROWS_AS(
      [&] {
        CounterSystem Mp = prepare(M, ApproxLabel::Precise, b);
        sat(Mp, parse_property("EG (x < 10)"), ApproxLabel::Precise, b);
      }(),
      BudgetExceededPrecise);
}
