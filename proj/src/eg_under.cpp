#include "psc/eg.hpp"

#include "psc/flatten.hpp"
#include "psc/reach.hpp"

namespace psc {

// Growing under-approximation of EG phi. States are added to X only when some
// flat unfolding N of the phi-refined system witnesses an infinite phi-path
// (the for-all-k closure of bounded backward reachability inside N), or when
// they can reach X inside N. Termination with a precise label happens when one
// unfolding simulates every phi-trace of the refined system from outside X.
CheckResult compute_global_under(const CounterSystem& M, const Formula& phi,
                                 const Budget& budget) {
  CheckResult res;
  res.states = f_false();
  res.label = ApproxLabel::Under;
  QeLimits lim = budget.qe_limits();

  Formula p = simplify(phi);
  if (!is_satisfiable(p, lim)) {
    res.states = f_false();
    res.label = ApproxLabel::Precise;
    return res;
  }

  CounterSystem M1 = refine(M, p);
  Formula X = f_false();

  for (std::size_t k = 1; k <= budget.max_flat_len; ++k) {
    if (budget.expired() && !budget.no_premature_stop) {
      res.states = X;
      return res;
    }
    std::vector<Flattening> flats = enumerate_flattenings(M1, k, 20000);
    res.stats.fl = static_cast<long long>(k);
    res.stats.nfe += static_cast<long long>(flats.size());

    for (const Flattening& N : flats) {
      if ((budget.expired() || budget.iterations_done(res.stats.ni)) &&
          !budget.no_premature_stop) {
        res.states = X;
        return res;
      }
      ++res.stats.ni;
      bool torn = false;
      auto absorb = [&](const Formula& part) {
        // X unchanged when part adds nothing; keeps X from accumulating
        // syntactically fresh but semantically redundant disjuncts.
        if (is_satisfiable(f_and(part, f_not(X)), lim)) X = simplify(f_or(X, part));
      };
      try {
        // States that reach the current X along the unfolding belong to X as
        // well: EG phi is closed under phi-predecessors, and every transition
        // of the refined system steps from a phi-state.
        CheckResult back = pre_star(N.system, lift_to_copies(N, X), budget);
        absorb(project_to_origin(N, back.states));
        // States with arbitrarily long phi-paths inside the unfolding.
        Formula bounded = pre_k_flat(N.system, lift_to_copies(N, p), lim);
        absorb(project_to_origin(N, forall_k_closure(bounded, lim)));
      } catch (const NotAccelerable&) {
        ++res.stats.skipped;
        torn = true;
      } catch (const ResourceExhausted&) {
        if (budget.no_premature_stop) throw;
        ++res.stats.skipped;
        torn = true;
      }
      res.stats.snapshots.emplace_back("X", X);
      if (torn) continue;
      if (trace_inclusion_check(M1, N, simplify(f_and(p, f_not(X))), budget) ==
          TraceCheck::Holds) {
        res.states = X;
        res.label = ApproxLabel::Precise;
        return res;
      }
    }
  }
  res.states = X;
  return res;
}

}  // namespace psc
