#ifndef PSC_SYSTEM_HPP
#define PSC_SYSTEM_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "psc/qe.hpp"

namespace psc {

// q is the reserved control-state variable in every formula.
inline const std::string kControlVar = "q";

// One counter's update on a transition. Either a functional assignment
// x' = expr, a bounded choice lo <= x' <= hi, or identity. The restriction
// keeps every state finitely branching.
struct ActionSpec {
  enum class Kind { Identity, Assign, Range } kind = Kind::Identity;
  LinearTerm expr;    // Assign
  LinearTerm lo, hi;  // Range
};

struct Transition {
  std::string id;
  int source = 0;
  int target = 0;
  Formula user_guard;  // state formula as written (plus declared-nat bounds)
  std::map<std::string, ActionSpec> actions;  // one entry per counter

  // Derived at construction:
  Formula guard;   // user_guard && q = source
  Formula action;  // counter updates && q' = target
};

enum class ReachTag { Exact, Over, Under };

std::string to_string(ReachTag t);

struct ReachHint {
  Formula formula;
  ReachTag tag = ReachTag::Exact;
};

struct CounterSystem {
  std::vector<int> controls;          // sorted, unique
  std::vector<std::string> counters;  // declaration order
  std::vector<Transition> transitions;
  Formula init;  // state formula; control-domain and nat bounds conjoined
  std::optional<ReachHint> reach_hint;

  bool has_control(int c) const;
  const Transition* find_transition(const std::string& id) const;
};

struct SystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Builds the derived guard/action formulas and validates variable scopes.
Transition make_transition(std::string id, int source, int target, Formula user_guard,
                           std::map<std::string, ActionSpec> actions,
                           const std::vector<std::string>& counters);

// disjunction of q = c over the system's controls
Formula control_domain(const CounterSystem& M);

CounterSystem parse_system(const std::string& text);
std::string print_system(const CounterSystem& M);

// Conjoins phi into every guard. Traces of the result are exactly the traces
// of M that never take a step from a state outside phi. Clears reach_hint.
CounterSystem refine(const CounterSystem& M, const Formula& phi);

// States with some successor in phi / some predecessor in phi.
Formula pre_image(const CounterSystem& M, const Formula& phi, const QeLimits& lim = {});
Formula post_image(const CounterSystem& M, const Formula& phi, const QeLimits& lim = {});

// States with no enabled transition.
Formula stuck_states(const CounterSystem& M);

// Adds a dead control with an unconditional identity self-loop plus one
// transition per control routing its stuck states there. The result has no
// stuck states; live traces are unchanged. An exact reach hint is extended to
// cover the dead copies of previously stuck reachable states.
CounterSystem complete_stuck(const CounterSystem& M);

// A concrete state: control value plus one integer per counter.
struct StateVector {
  int control = 0;
  std::map<std::string, Int> vals;

  bool operator==(const StateVector& o) const {
    return control == o.control && vals == o.vals;
  }
  bool operator<(const StateVector& o) const {
    if (control != o.control) return control < o.control;
    return vals < o.vals;
  }
};

std::string to_string(const StateVector& s);

std::map<std::string, Int> state_env(const StateVector& s);

bool state_satisfies(const StateVector& s, const Formula& phi);

// Whether some transition takes s to t in one step.
bool step_exists(const CounterSystem& M, const StateVector& s, const StateVector& t);

// A concrete trace; adjacency is validated against the owning system.
struct TraceSample {
  std::vector<StateVector> states;

  TraceSample(const CounterSystem& M, std::vector<StateVector> sts);
};

}  // namespace psc

#endif
