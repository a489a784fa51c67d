#ifndef PSC_REACH_HPP
#define PSC_REACH_HPP

#include <optional>

#include "psc/check.hpp"
#include "psc/system.hpp"

namespace psc {

// Free variable of the parametric step count in pre_k_flat results.
inline const std::string kStepVar = "k";

// A simple control cycle whose one-iteration effect is a guarded translation
// x -> x + d. param_relation relates a state at the entry control (unprimed)
// to the state after n full iterations (primed), for a fresh variable n >= 0.
// Because the composed guard is a conjunction of linear atoms, its truth along
// the iterations is settled by the first and last one.
struct AcceleratedCycle {
  std::vector<Transition> cycle;  // entry control is cycle.front().source
  std::map<std::string, Int> displacement;
  Formula param_relation;
  std::string n_var;
  int entry = 0;
};

struct NotAccelerable : std::runtime_error {
  explicit NotAccelerable(const std::string& what) : std::runtime_error(what) {}
};

// nullopt when the cycle is not a guarded translation (non-translation
// assignment, bounded update, or a guard outside conjunctions of linear
// atoms).
std::optional<AcceleratedCycle> accelerate_cycle(const std::vector<Transition>& cycle,
                                                 const std::vector<std::string>& counters);

// Simple cycles of the control multigraph as transition sequences, in a
// deterministic order, at most `cap` of them.
std::vector<std::vector<Transition>> simple_control_cycles(const CounterSystem& M,
                                                           std::size_t cap = 64);

// No two distinct control cycles share a control state.
bool is_flat(const CounterSystem& M);

// Backward/forward reflexive-transitive images. The fixpoint interleaves
// one-step images with acceleration jumps over every accelerable simple
// cycle. Label Precise certifies a closed fixpoint; a budget stop returns the
// partial set labeled Under (with no_premature_stop, resource exhaustion
// propagates instead).
CheckResult pre_star(const CounterSystem& M, const Formula& phi, const Budget& budget);
CheckResult post_star(const CounterSystem& M, const Formula& phi, const Budget& budget);

// States from which phi is reached in exactly k steps of the flat system N,
// with k left free. Decomposes N's control graph into simple skeleton paths
// with full-cycle rotation counts at each cycle entry.
Formula pre_k_flat(const CounterSystem& N, const Formula& phi, const QeLimits& lim = {});

// eliminate_quantifiers(forall k. k >= 0 -> f)
Formula forall_k_closure(const Formula& f, const QeLimits& lim = {});

}  // namespace psc

#endif
