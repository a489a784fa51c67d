#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "psc/oracle.hpp"
#include "psc/qe.hpp"
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

LinearTerm V(const std::string& n) { return LinearTerm::variable(n); }

StateVector st(int q, Int x) { return StateVector{q, {{"x", x}}}; }

}  // namespace

TEST_CASE("parsing the one-loop system") {
  CounterSystem M = parse_system(kLoop);
  CHECK(M.counters == std::vector<std::string>{"x"});
  CHECK(M.controls == std::vector<int>{0});
  REQUIRE(M.transitions.size() == 2);
  CHECK(M.transitions[0].id == "t0");
  CHECK(M.transitions[1].id == "t1");
  CHECK(!M.reach_hint.has_value());

  // init carries the control domain
  CHECK(equivalent(M.init, parse_formula("x = 0 && q = 0")));

  // derived guard grounds the control
  CHECK(equivalent(M.transitions[0].guard,
                   parse_formula("x >= 0 && x < 100 && q = 0")));
  CHECK(equivalent(M.transitions[1].guard,
                   parse_formula("x > 0 && x < 5 && q = 0")));

  const Transition* t0 = M.find_transition("t0");
  REQUIRE(t0 != nullptr);
  CHECK(t0->target == 0);
  CHECK(M.find_transition("nope") == nullptr);
  CHECK(M.has_control(0));
  CHECK(!M.has_control(1));
}

TEST_CASE("print then parse is stable") {
  CounterSystem M = parse_system(kLoop);
  CounterSystem M2 = parse_system(print_system(M));
  CHECK(M2.counters == M.counters);
  CHECK(M2.controls == M.controls);
  REQUIRE(M2.transitions.size() == M.transitions.size());
  for (std::size_t i = 0; i < M.transitions.size(); ++i) {
    CHECK(M2.transitions[i].id == M.transitions[i].id);
    CHECK(equivalent(M2.transitions[i].guard, M.transitions[i].guard));
  }
  CHECK(equivalent(M2.init, M.init));
}

TEST_CASE("nat counters get nonnegativity for free") {
  CounterSystem M = parse_system(R"(
counters nat x;
controls 0;
init: x <= 3;
transition up from 0 to 0 guard x <= 9 action x' = x + 1;
)");
  CHECK(entails(M.init, parse_formula("x >= 0")));
  CHECK(entails(M.transitions[0].user_guard, parse_formula("x >= 0")));
  CHECK(!state_satisfies(st(0, -1), M.transitions[0].guard));
  CHECK(state_satisfies(st(0, 0), M.transitions[0].guard));
}

TEST_CASE("parser rejects malformed systems") {
  CHECK_THROWS_AS(parse_system("counters q;\ncontrols 0;\ninit: true;"),
                  ParseError);
  CHECK_THROWS_AS(parse_system("counters x, x;\ncontrols 0;\ninit: true;"),
                  ParseError);
  // duplicate transition id
  CHECK_THROWS_AS(parse_system(R"(
counters x;
controls 0;
init: true;
transition a from 0 to 0 guard true;
transition a from 0 to 0 guard true;
)"),
                  SystemError);
  // undeclared control
  CHECK_THROWS_AS(parse_system(R"(
counters x;
controls 0;
init: true;
transition a from 0 to 7 guard true;
)"),
                  SystemError);
  // unknown variable in a guard
  CHECK_THROWS_AS(parse_system(R"(
counters x;
controls 0;
init: true;
transition a from 0 to 0 guard y <= 2;
)"),
                  SystemError);
  // action on an undeclared counter
  CHECK_THROWS_AS(parse_system(R"(
counters x;
controls 0;
init: true;
transition a from 0 to 0 guard true action y' = 1;
)"),
                  SystemError);
  // missing init
  CHECK_THROWS_AS(parse_system("counters x;\ncontrols 0;"), SystemError);
  // over hint is fine, an exact hint that misses init is not
  CHECK_THROWS_AS(parse_system(R"(
counters x;
controls 0;
init: x = 0;
reach: x >= 5 exact;
)"),
                  SystemError);
  CounterSystem ok = parse_system(R"(
counters x;
controls 0;
init: x = 0;
reach: x >= 0 over;
)");
  REQUIRE(ok.reach_hint.has_value());
  CHECK(ok.reach_hint->tag == ReachTag::Over);
}

TEST_CASE("make_transition derives update relations") {
  std::vector<std::string> counters{"x", "y"};
  std::map<std::string, ActionSpec> acts;
  acts["x"] = ActionSpec{ActionSpec::Kind::Assign, V("x") + LinearTerm(Int(2)), {}, {}};
  acts["y"] = ActionSpec{ActionSpec::Kind::Range, {}, LinearTerm(Int(0)), LinearTerm(Int(3))};
  Transition t = make_transition("t", 0, 1, parse_formula("x <= 5"), acts, counters);
  CHECK(equivalent(t.guard, parse_formula("x <= 5 && q = 0")));
  CHECK(equivalent(t.action,
                   parse_formula("x' = x + 2 && y' >= 0 && y' <= 3 && q' = 1")));

  // identity is the default for counters without an action
  Transition id = make_transition("u", 1, 0, f_true(), {}, counters);
  CHECK(equivalent(id.action, parse_formula("x' = x && y' = y && q' = 0")));

  CHECK_THROWS_AS(
      make_transition("v", 0, 0, parse_formula("z <= 1"), {}, counters),
      SystemError);
}

TEST_CASE("refine conjoins into guards and composes") {
  CounterSystem M = parse_system(kLoop);
  CounterSystem R = refine(M, parse_formula("x < 10"));
  CHECK(equivalent(R.transitions[0].guard,
                   parse_formula("x >= 0 && x < 100 && x < 10 && q = 0")));
  CHECK(equivalent(R.transitions[1].guard,
                   parse_formula("x > 0 && x < 5 && x < 10 && q = 0")));
  CHECK(!R.reach_hint.has_value());

  CounterSystem R2 = refine(refine(M, parse_formula("x < 10")),
                            parse_formula("x >= 2"));
  CounterSystem R3 = refine(M, parse_formula("x < 10 && x >= 2"));
  for (std::size_t i = 0; i < R2.transitions.size(); ++i)
    CHECK(equivalent(R2.transitions[i].guard, R3.transitions[i].guard));

  // refining by true changes nothing semantically
  CounterSystem Rt = refine(M, f_true());
  CHECK(equivalent(Rt.transitions[0].guard, M.transitions[0].guard));
}

TEST_CASE("pre_image of the one-loop system") {
  CounterSystem M = parse_system(kLoop);
  Formula pre = pre_image(M, parse_formula("x <= 2"));
  CHECK(equivalent(pre, parse_formula("q = 0 && x >= 0 && x <= 3")));

  CHECK(is_false(simplify(pre_image(M, f_false()))));

  // agreement with concrete successor enumeration on a window
  for (int x = -3; x <= 8; ++x) {
    StateVector s = st(0, x);
    bool claimed = state_satisfies(s, pre);
    bool actual = false;
    for (const StateVector& n : concrete_successors(M, s))
      if (state_satisfies(n, parse_formula("x <= 2"))) actual = true;
    CHECK_MESSAGE(claimed == actual, "x = ", x);
  }
}

TEST_CASE("post_image of the one-loop system") {
  CounterSystem M = parse_system(kLoop);
  Formula post = post_image(M, M.init);
  CHECK(equivalent(post, parse_formula("q = 0 && x = 1")));
  CHECK(is_false(simplify(post_image(M, f_false()))));

  // distributes over disjunction
  Formula a = parse_formula("q = 0 && x = 1");
  Formula b = parse_formula("q = 0 && x = 7");
  CHECK(equivalent(post_image(M, f_or(a, b)),
                   f_or(post_image(M, a), post_image(M, b))));
}

TEST_CASE("stuck states") {
  CounterSystem M = parse_system(kLoop);
  Formula dom = control_domain(M);
  CHECK(equivalent(f_and(stuck_states(M), dom),
                   parse_formula("q = 0 && (x < 0 || x >= 100)")));

  CounterSystem R = refine(M, parse_formula("x < 10"));
  CHECK(equivalent(f_and(stuck_states(R), dom),
                   parse_formula("q = 0 && (x < 0 || x >= 10)")));

  CounterSystem Free = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition spin from 0 to 0 guard true;
)");
  CHECK(!is_satisfiable(f_and(stuck_states(Free), control_domain(Free))));
}

TEST_CASE("complete_stuck removes stuck states and keeps live traces") {
  CounterSystem M = parse_system(kLoop);
  CounterSystem C = complete_stuck(M);
  CHECK(C.controls.size() == 2);
  CHECK(!is_satisfiable(f_and(stuck_states(C), control_domain(C))));

  // x = 100 was stuck; now it has exactly one successor, in the dead control
  auto succs = concrete_successors(C, st(0, 100));
  REQUIRE(succs.size() == 1);
  CHECK(succs[0].control == 1);
  CHECK(succs[0].vals.at("x") == 100);
  // and the dead state loops on itself
  auto loop = concrete_successors(C, succs[0]);
  REQUIRE(loop.size() == 1);
  CHECK(loop[0] == succs[0]);

  // live states keep their successor sets
  for (int x = 0; x <= 6; ++x) {
    CHECK(concrete_successors(C, st(0, x)).size() ==
          concrete_successors(M, st(0, x)).size());
  }

  // a system with no stuck states gains nothing reachable
  CounterSystem Free = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition spin from 0 to 0 guard true;
)");
  CounterSystem CF = complete_stuck(Free);
  CHECK(concrete_successors(CF, st(0, 0)).size() ==
        concrete_successors(Free, st(0, 0)).size());
}

TEST_CASE("complete_stuck extends an exact reach hint") {
  CounterSystem M = parse_system(R"(
counters x;
controls 0;
init: x = 0;
reach: q = 0 && x >= 0 && x <= 100 exact;
transition t0 from 0 to 0 guard x >= 0 && x < 100 action x' = x + 1;
transition t1 from 0 to 0 guard x > 0 && x < 5 action x' = x - 1;
)");
  CounterSystem C = complete_stuck(M);
  REQUIRE(C.reach_hint.has_value());
  CHECK(C.reach_hint->tag == ReachTag::Exact);
  // the dead copy of the only reachable stuck state x = 100 is covered
  CHECK(state_satisfies(StateVector{1, {{"x", 100}}}, C.reach_hint->formula));
  CHECK(state_satisfies(st(0, 40), C.reach_hint->formula));
  CHECK(!state_satisfies(StateVector{1, {{"x", 3}}}, C.reach_hint->formula));
}

TEST_CASE("state predicates and steps") {
  CounterSystem M = parse_system(kLoop);
  CHECK(state_satisfies(st(0, 0), M.init));
  CHECK(!state_satisfies(st(0, 1), M.init));
  CHECK(step_exists(M, st(0, 0), st(0, 1)));
  CHECK(step_exists(M, st(0, 3), st(0, 2)));
  CHECK(!step_exists(M, st(0, 0), st(0, 2)));
  CHECK(!step_exists(M, st(0, 100), st(0, 101)));

  TraceSample ok(M, {st(0, 0), st(0, 1), st(0, 2), st(0, 1)});
  CHECK(ok.states.size() == 4);
  CHECK_THROWS_AS(TraceSample(M, {st(0, 0), st(0, 2)}), SystemError);
}

TEST_CASE("control domain") {
  CounterSystem M = parse_system(R"(
counters x;
controls 0, 2, 5;
init: q = 0 && x = 0;
transition a from 0 to 2 guard true;
transition b from 2 to 5 guard true;
transition c from 5 to 0 guard true;
)");
  Formula dom = control_domain(M);
  CHECK(state_satisfies(StateVector{2, {{"x", 0}}}, dom));
  CHECK(!state_satisfies(StateVector{1, {{"x", 0}}}, dom));
  CHECK(equivalent(dom, parse_formula("q = 0 || q = 2 || q = 5")));
}
