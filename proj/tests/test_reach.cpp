#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

#include "psc/oracle.hpp"
#include "psc/reach.hpp"
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

using Env = std::map<std::string, Int>;

}  // namespace

TEST_CASE("accelerating the increment loop") {
  CounterSystem M = refine(parse_system(kLoop), parse_formula("x < 10"));
  auto acc = accelerate_cycle({M.transitions[0]}, M.counters);
  REQUIRE(acc.has_value());
  CHECK(acc->displacement.at("x") == 1);
  CHECK(acc->entry == 0);

  // the parametric relation agrees with concrete n-fold application
  for (int n = 0; n <= 5; ++n) {
    for (int x = -2; x <= 12; ++x) {
      bool concrete = true;
      for (int i = 0; i < n; ++i)
        if (!(x + i >= 0 && x + i < 100 && x + i < 10)) concrete = false;
      Env env{{"x", x}, {"x'", x + n}, {acc->n_var, n}, {"q", 0}, {"q'", 0}};
      bool sym = evaluate(acc->param_relation, env);
      CHECK_MESSAGE(sym == concrete, "n = ", n, " x = ", x);
      // and the relation pins the displacement: x' must be x + n
      if (n >= 1 && x == 0) {
        env["x'"] = x + n - 1;
        CHECK(!evaluate(acc->param_relation, env));
      }
    }
  }
}

TEST_CASE("accelerating the decrement loop") {
  CounterSystem M = parse_system(kLoop);
  auto acc = accelerate_cycle({M.transitions[1]}, M.counters);
  REQUIRE(acc.has_value());
  CHECK(acc->displacement.at("x") == -1);
}

TEST_CASE("non-translations refuse to accelerate") {
  CounterSystem D = parse_system(R"(
counters x;
controls 0;
init: x = 1;
transition dbl from 0 to 0 guard x >= 1 action x' = 2*x;
transition pick from 0 to 0 guard x = 0 action 0 <= x' <= 3;
)");
  CHECK(!accelerate_cycle({D.transitions[0]}, D.counters).has_value());
  CHECK(!accelerate_cycle({D.transitions[1]}, D.counters).has_value());
}

TEST_CASE("simple control cycles are found deterministically") {
  CounterSystem M = parse_system(kLoop);
  auto cycles = simple_control_cycles(M);
  REQUIRE(cycles.size() == 2);
  CHECK(cycles[0].size() == 1);
  CHECK(cycles[1].size() == 1);
  CHECK(cycles[0][0].id != cycles[1][0].id);

  auto again = simple_control_cycles(M);
  for (std::size_t i = 0; i < cycles.size(); ++i)
    CHECK(cycles[i][0].id == again[i][0].id);

  CHECK(simple_control_cycles(M, 1).size() == 1);
}

TEST_CASE("flatness of control graphs") {
  CHECK(!is_flat(parse_system(kLoop)));  // two loops share the control

  CounterSystem single = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition up from 0 to 0 guard x < 9 action x' = x + 1;
)");
  CHECK(is_flat(single));

  CounterSystem two = parse_system(R"(
counters x;
controls 0, 1;
init: q = 0 && x = 0;
transition a from 0 to 0 guard x < 5 action x' = x + 1;
transition go from 0 to 1 guard true;
transition b from 1 to 1 guard x > 0 action x' = x - 1;
)");
  CHECK(is_flat(two));
}

TEST_CASE("pre_star on the one-loop system") {
  CounterSystem M = parse_system(kLoop);
  Budget b;
  CheckResult r = pre_star(M, parse_formula("x <= 4"), b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(equivalent(f_and(r.states, control_domain(M)),
                   parse_formula("q = 0 && x <= 4")));

  CheckResult none = pre_star(M, f_false(), b);
  CHECK(none.label == ApproxLabel::Precise);
  CHECK(is_false(simplify(none.states)));
  CHECK(none.stats.ni <= 1);  // one image round certifies the empty fixpoint

  // per-state agreement with the explicit oracle
  FiniteGraph G = explore(M, M.init);
  auto want = oracle_pre_star(G, parse_formula("x = 50"));
  CheckResult r50 = pre_star(M, parse_formula("q = 0 && x = 50"), b);
  REQUIRE(r50.label == ApproxLabel::Precise);
  for (int i = 0; i < (int)G.states.size(); ++i)
    CHECK(state_satisfies(G.states[i], r50.states) == (want.count(i) == 1));
}

TEST_CASE("post_star on the one-loop system") {
  CounterSystem M = parse_system(kLoop);
  Budget b;
  CheckResult r = post_star(M, M.init, b);
  CHECK(r.label == ApproxLabel::Precise);
  CHECK(equivalent(r.states, parse_formula("q = 0 && x >= 0 && x <= 100")));
  CHECK(entails(M.init, r.states));

  CheckResult mid = post_star(M, parse_formula("q = 0 && x = 98"), b);
  CHECK(mid.label == ApproxLabel::Precise);
  CHECK(equivalent(mid.states, parse_formula("q = 0 && x >= 98 && x <= 100")));
}

TEST_CASE("budget stops degrade to an under-approximation") {
  CounterSystem M = parse_system(kLoop);
  Budget tight;
  tight.max_iterations = 1;
  CheckResult r = post_star(M, M.init, tight);
  CHECK(r.label == ApproxLabel::Under);
  CHECK(entails(M.init, r.states));  // the seed is always kept
  Budget full;
  CheckResult exact = post_star(M, M.init, full);
  CHECK(entails(r.states, exact.states));

  Budget hard;
  hard.wall_limit = std::chrono::milliseconds(0);
  hard.no_premature_stop = true;
  CHECK_THROWS_AS(post_star(M, M.init, hard), ResourceExhausted);
}

TEST_CASE("parametric backward steps on a flat loop") {
  CounterSystem N = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition up from 0 to 0 guard x >= 0 && x < 100 action x' = x + 1;
)");
  Formula f = pre_k_flat(N, parse_formula("x = 4"));
  CHECK(free_vars(f).count(kStepVar) == 1);

  FiniteGraph G = explore(N, parse_formula("q = 0 && x >= -5 && x <= 10"));
  for (int k = 0; k <= 6; ++k) {
    auto want = oracle_pre_k(G, parse_formula("x = 4"), k);
    for (int i = 0; i < (int)G.states.size(); ++i) {
      Env env = state_env(G.states[i]);
      env[kStepVar] = k;
      CHECK_MESSAGE(evaluate(f, env) == (want.count(i) == 1),
                    "x = ", G.states[i].vals.at("x"), " k = ", k);
    }
  }

  // k = 0 is the property itself
  Formula at0 = substitute_var(f, kStepVar, LinearTerm(Int(0)));
  CHECK(equivalent(f_and(at0, control_domain(N)),
                   parse_formula("q = 0 && x = 4")));
}

TEST_CASE("universal closure over the step parameter") {
  CHECK(is_false(simplify(forall_k_closure(
      t_ge(LinearTerm::variable("x"), LinearTerm::variable(kStepVar))))));
  CHECK(is_true(simplify(forall_k_closure(
      t_ge(LinearTerm::variable(kStepVar), LinearTerm(Int(0)))))));
}

TEST_CASE("closure of parametric steps matches EG on flat systems") {
  // identity self-loop: every state in the guard loops forever
  CounterSystem Spin = parse_system(R"(
counters x;
controls 0;
init: x = 0;
transition spin from 0 to 0 guard x >= 0 && x < 5;
)");
  Formula eg = forall_k_closure(pre_k_flat(Spin, f_true()));
  FiniteGraph G = explore(Spin, parse_formula("q = 0 && x >= -2 && x <= 8"));
  auto want = oracle_ctl(G, ctl_eg(ctl_prop(f_true())));
  for (int i = 0; i < (int)G.states.size(); ++i)
    CHECK(state_satisfies(G.states[i], eg) == (want.count(i) == 1));

  // strictly decreasing loop: no state survives forever
  CounterSystem Down = parse_system(R"(
counters x;
controls 0;
init: x = 9;
transition dn from 0 to 0 guard x > 0 action x' = x - 1;
)");
  Formula none = forall_k_closure(pre_k_flat(Down, f_true()));
  CHECK(!is_satisfiable(f_and(none, control_domain(Down))));
}
