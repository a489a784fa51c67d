#include "psc/eg.hpp"

#include <vector>

#include "psc/reach.hpp"

namespace psc {

namespace {

std::vector<std::string> state_vars(const CounterSystem& M) {
  std::vector<std::string> vs{kControlVar};
  vs.insert(vs.end(), M.counters.begin(), M.counters.end());
  return vs;
}

std::string dprimed(const std::string& v) { return v + "''"; }

}  // namespace

Formula grow1(const CounterSystem& M1, const Formula& Y, const QeLimits& lim) {
  return minimize(f_and(f_not(pre_image(M1, f_not(Y), lim)), f_not(Y)), lim);
}

Formula atmost_one_succ_outside(const CounterSystem& M1, const Formula& Y,
                                const QeLimits& lim) {
  std::vector<std::string> vs = state_vars(M1);
  std::map<std::string, LinearTerm> to_primed, to_dprimed, primed_to_dprimed;
  for (const std::string& v : vs) {
    to_primed[v] = LinearTerm::variable(primed(v));
    to_dprimed[v] = LinearTerm::variable(dprimed(v));
    primed_to_dprimed[primed(v)] = LinearTerm::variable(dprimed(v));
  }

  Formula Yp = substitute(Y, to_primed);
  Formula Ypp = substitute(Y, to_dprimed);
  std::vector<Formula> same_parts;
  for (const std::string& v : vs)
    same_parts.push_back(
        f_eq(LinearTerm::variable(primed(v)) - LinearTerm::variable(dprimed(v))));
  Formula same = f_and(same_parts);
  Formula ok = f_or({same, f_and(Yp, Ypp), f_and(Yp, f_not(Ypp)), f_and(f_not(Yp), Ypp)});

  std::vector<Formula> conds;
  for (const Transition& ti : M1.transitions) {
    Formula ri = f_and(ti.guard, ti.action);
    for (const Transition& tj : M1.transitions) {
      Formula rj = substitute(f_and(tj.guard, tj.action), primed_to_dprimed);
      conds.push_back(f_implies(f_and(ri, rj), ok));
    }
  }
  Formula body = f_and(conds);
  for (const std::string& v : vs) body = f_forall(dprimed(v), body);
  for (const std::string& v : vs) body = f_forall(primed(v), body);
  return minimize(eliminate_quantifiers(body, lim), lim);
}

Formula grow2(const CounterSystem& M1, const Formula& Y, const Budget& budget,
              bool* degraded) {
  QeLimits lim = budget.qe_limits();
  try {
    Formula atmost = atmost_one_succ_outside(M1, Y, lim);
    CheckResult a = pre_star(M1, f_not(atmost), budget);
    CheckResult b = pre_star(M1, grow1(M1, Y, lim), budget);
    if (a.label != ApproxLabel::Precise || b.label != ApproxLabel::Precise) {
      if (degraded) *degraded = true;
      return f_false();
    }
    return minimize(f_and(f_not(a.states), b.states), lim);
  } catch (const ResourceExhausted&) {
    if (budget.no_premature_stop) throw;
    if (degraded) *degraded = true;
    return f_false();
  }
}

// Shrinking over-approximation of EG phi. Y collects states that provably
// admit no infinite phi-path: initially the stuck states of the phi-refined
// system and the states violating phi, then grown by two closure steps until
// nothing new is found. At that point every state outside Y can take a step
// and stay outside Y forever, so the complement is exact; a degraded last
// round (an inner reachability query that had to stop early) keeps the
// over-approximation label instead.
CheckResult compute_global_over(const CounterSystem& M, const Formula& phi,
                                const Budget& budget) {
  CheckResult res;
  res.label = ApproxLabel::Over;
  QeLimits lim = budget.qe_limits();

  Formula reach = f_true();
  res.stats.reach_tag = "assumed-true";
  if (M.reach_hint &&
      (M.reach_hint->tag == ReachTag::Exact || M.reach_hint->tag == ReachTag::Over)) {
    reach = M.reach_hint->formula;
    res.stats.reach_tag = M.reach_hint->tag == ReachTag::Exact ? "exact" : "over";
  }

  Formula p = simplify(phi);
  CounterSystem M1 = refine(M, p);
  Formula Y = simplify(f_or(stuck_states(M1), f_not(p)));

  try {
    Y = minimize(Y, lim);
    for (;;) {
      if (budget.expired() || budget.iterations_done(res.stats.ni)) {
        if (budget.no_premature_stop) throw BudgetExceededPrecise();
        res.states = simplify(f_and(reach, f_not(Y)));
        return res;
      }
      ++res.stats.ni;
      Formula g1 = grow1(M1, Y, lim);
      bool degraded_last = false;
      Formula g2 = grow2(M1, Y, budget, &degraded_last);
      Formula growth = simplify(f_or(g1, g2));
      if (!is_satisfiable(f_and(growth, f_not(Y)), lim)) {
        res.states = minimize(f_and(reach, f_not(Y)), lim);
        res.label = degraded_last ? ApproxLabel::Over : ApproxLabel::Precise;
        return res;
      }
      Y = minimize(f_or(Y, growth), lim);
      res.stats.snapshots.emplace_back("Y", Y);
    }
  } catch (const ResourceExhausted&) {
    if (budget.no_premature_stop) throw;
    res.states = simplify(f_and(reach, f_not(Y)));
    return res;
  }
}

}  // namespace psc
