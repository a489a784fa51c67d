#ifndef PSC_QE_HPP
#define PSC_QE_HPP

#include <chrono>
#include <optional>

#include "psc/presburger.hpp"

namespace psc {

// Raised when a decision-procedure call exceeds its node budget or deadline.
// Callers treat it as a forced stop, never as an answer.
struct ResourceExhausted : std::runtime_error {
  enum class Why { NodeBudget, Deadline };
  Why why;
  explicit ResourceExhausted(Why w)
      : std::runtime_error(w == Why::NodeBudget ? "node budget exhausted" : "deadline reached"),
        why(w) {}
};

struct QeLimits {
  std::size_t node_budget = 80'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Cooper-style quantifier elimination over the integers. Result is
// quantifier-free and equivalent; may introduce divisibility atoms.
Formula eliminate_quantifiers(const Formula& f, const QeLimits& lim = {});

// exists vars. f, eliminating inner quantifiers first. Equality conjuncts with
// unit coefficient are substituted away before the general procedure runs.
Formula eliminate_exists(const std::vector<std::string>& vars, const Formula& f,
                         const QeLimits& lim = {});

// Truth of f under env; env must cover every free variable. Quantifiers are
// decided by elimination after the free variables are substituted.
bool evaluate(const Formula& f, const std::map<std::string, Int>& env,
              const QeLimits& lim = {});

struct SatResult {
  bool sat = false;
  std::map<std::string, Int> witness;  // populated when sat and requested
};

SatResult check_sat(const Formula& f, const QeLimits& lim = {}, bool want_witness = false);
bool is_satisfiable(const Formula& f, const QeLimits& lim = {});
bool entails(const Formula& f1, const Formula& f2, const QeLimits& lim = {});
bool equivalent(const Formula& f1, const Formula& f2, const QeLimits& lim = {});

// Equivalent compaction of a quantifier-free formula: capped disjunctive
// normal form, infeasible branches dropped, dominated atoms removed, subsumed
// branches folded. Falls back to the syntactic simplifier whenever the normal
// form would grow past its caps, so the result is never larger than that.
// Deadline exhaustion propagates; node-budget pressure only skips pruning.
Formula minimize(const Formula& f, const QeLimits& lim = {});

}  // namespace psc

#endif
