#ifndef PSC_ORACLE_HPP
#define PSC_ORACLE_HPP

#include <set>

#include "psc/ctl.hpp"
#include "psc/system.hpp"

namespace psc {

// The explicit-state reference checker. It shares no image/fixpoint code with
// the symbolic engine, so agreement between the two is meaningful evidence.

struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct FiniteGraph {
  std::vector<StateVector> states;
  std::map<StateVector, int> index;
  std::vector<std::vector<int>> succs;
  bool complete = false;  // set when the forward frontier was exhausted

  int find(const StateVector& s) const {
    auto it = index.find(s);
    return it == index.end() ? -1 : it->second;
  }
};

// All one-step successors of s, enumerated from the transition actions.
std::vector<StateVector> concrete_successors(const CounterSystem& M, const StateVector& s,
                                             std::size_t cap = 100000);

// Seed states satisfying `from` (found by repeated satisfiability queries with
// blocking clauses), then forward BFS closure. Throws CapExceeded when the
// graph would exceed cap states or `from` has infinitely many models.
FiniteGraph explore(const CounterSystem& M, const Formula& from, std::size_t cap = 100000);

std::set<int> oracle_sat_set(const FiniteGraph& G, const Formula& phi);
std::set<int> oracle_ctl(const FiniteGraph& G, const CtlFormula& psi);
std::set<int> oracle_pre_k(const FiniteGraph& G, const Formula& phi, std::size_t k);
std::set<int> oracle_pre_star(const FiniteGraph& G, const Formula& phi);
std::set<int> oracle_post_star(const FiniteGraph& G, const Formula& phi);

}  // namespace psc

#endif
