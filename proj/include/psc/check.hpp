#ifndef PSC_CHECK_HPP
#define PSC_CHECK_HPP

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psc/qe.hpp"

namespace psc {

// How a computed state set relates to the exact one.
enum class ApproxLabel { Precise, Under, Over };

inline std::string to_string(ApproxLabel l) {
  switch (l) {
    case ApproxLabel::Precise: return "precise";
    case ApproxLabel::Under: return "under";
    case ApproxLabel::Over: return "over";
  }
  return "?";
}

// Joining Under with Over would claim both inclusions at once; the analysis
// never produces that combination, so it is an internal error.
struct LabelConflict : std::logic_error {
  LabelConflict() : std::logic_error("cannot join an under- and an over-approximation") {}
};

inline ApproxLabel lattice_join(ApproxLabel a, ApproxLabel b) {
  if (a == ApproxLabel::Precise) return b;
  if (b == ApproxLabel::Precise) return a;
  if (a != b) throw LabelConflict();
  return a;
}

// Complementing a set flips the direction of the approximation.
inline ApproxLabel lattice_negate(ApproxLabel a) {
  switch (a) {
    case ApproxLabel::Under: return ApproxLabel::Over;
    case ApproxLabel::Over: return ApproxLabel::Under;
    default: return ApproxLabel::Precise;
  }
}

// Thrown when the caller insisted on a precise answer and the budget ran out
// before one was reached.
struct BudgetExceededPrecise : std::runtime_error {
  BudgetExceededPrecise() : std::runtime_error("budget exhausted before a precise result") {}
};

struct Budget {
  std::size_t max_iterations = 0;  // outer loop bound per engine; 0 = unlimited
  std::optional<std::chrono::milliseconds> wall_limit;
  std::size_t max_flat_len = 12;  // edge-count cap when enumerating flattenings
  std::size_t qe_node_limit = 80'000'000;
  // A precise answer was demanded: budget pressure must not degrade the label,
  // it can only abort the whole run.
  bool no_premature_stop = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  std::optional<std::chrono::steady_clock::time_point> deadline() const {
    if (!wall_limit) return std::nullopt;
    return start + *wall_limit;
  }
  QeLimits qe_limits() const {
    QeLimits lim;
    lim.node_budget = qe_node_limit;
    lim.deadline = deadline();
    return lim;
  }
  bool expired() const {
    auto d = deadline();
    return d && std::chrono::steady_clock::now() > *d;
  }
  bool iterations_done(std::size_t done) const {
    return max_iterations != 0 && done >= max_iterations;
  }
};

struct Stats {
  long long ni = 0;   // iterations of the iterative engines
  long long nfe = 0;  // flattenings enumerated
  long long fl = 0;   // largest flattening length explored
  long long rt_ms = 0;
  long long skipped = 0;  // flattenings abandoned on resource exhaustion
  std::string reach_tag;  // exactness of the reachable-state precomputation
  // One (tag, set) pair per engine iteration: the under engine logs X, the
  // over engine logs Y. Used by --dump-iterations and the invariant tests.
  std::vector<std::pair<std::string, Formula>> snapshots;

  void absorb(const Stats& o) {
    ni += o.ni;
    nfe += o.nfe;
    fl = std::max(fl, o.fl);
    skipped += o.skipped;
    for (const auto& s : o.snapshots) snapshots.push_back(s);
  }
};

struct CheckResult {
  Formula states = nullptr;
  ApproxLabel label = ApproxLabel::Precise;
  Stats stats;
};

}  // namespace psc

#endif
