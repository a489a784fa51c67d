#ifndef PSC_EG_HPP
#define PSC_EG_HPP

#include "psc/check.hpp"
#include "psc/system.hpp"

namespace psc {

// EG(phi) engines. Both refine M by phi internally; M must already be free of
// stuck states (the CTL driver completes it first) so that EG talks about
// infinite traces only.

// Growing under-approximation: accumulates states X proven to head an infinite
// phi-trace, using flat unfoldings of increasing length. Label precise when a
// trace-inclusion certificate shows X is complete; under on any forced stop.
CheckResult compute_global_under(const CounterSystem& M, const Formula& phi,
                                 const Budget& budget);

// Shrinking over-approximation: grows the complement Y (states with no
// infinite phi-trace) until no growth formula is satisfiable. Label precise
// when the loop exits by unsatisfiability with full growth formulas.
CheckResult compute_global_over(const CounterSystem& M, const Formula& phi,
                                const Budget& budget);

// Building blocks of the over engine, exposed for tests.

// States outside Y all of whose successors are in Y (stuck states included).
Formula grow1(const CounterSystem& M1, const Formula& Y, const QeLimits& lim = {});

// States with at most one successor outside Y.
Formula atmost_one_succ_outside(const CounterSystem& M1, const Formula& Y,
                                const QeLimits& lim = {});

// States whose entire branching-modulo-Y future is a single ray that dies in
// grow1. Both inner reachability queries must come back precise; otherwise the
// result degrades to false for this round and *degraded is set.
Formula grow2(const CounterSystem& M1, const Formula& Y, const Budget& budget,
              bool* degraded = nullptr);

}  // namespace psc

#endif
