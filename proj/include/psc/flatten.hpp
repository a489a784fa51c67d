#ifndef PSC_FLATTEN_HPP
#define PSC_FLATTEN_HPP

#include "psc/check.hpp"
#include "psc/system.hpp"

namespace psc {

// A flat unfolding of a system. The unfolding's own control graph runs over
// copy indices 0..n-1; guards and action expressions have the control variable
// grounded to the origin control, so formulas transfer back to the origin
// system by renaming q only.
struct Flattening {
  CounterSystem system;
  std::map<int, int> copy_of_control;                     // copy index -> origin control
  std::map<std::string, std::string> copy_of_transition;  // copy id -> origin id
  std::size_t length = 0;                                 // number of transitions
};

// Every flattening of M1 with exactly `length` transitions, deduplicated up to
// renumbering of same-origin copies, in a deterministic order. Every copy has
// at least one outgoing edge (a dead-end copy adds no trace the remaining
// copies lack) and no two parallel edges carry the same origin transition.
// max_count > 0 truncates the sequence (a deterministic prefix).
std::vector<Flattening> enumerate_flattenings(const CounterSystem& M1, std::size_t length,
                                              std::size_t max_count = 0);

// phi over origin controls -> the same set read at each copy.
Formula lift_to_copies(const Flattening& F, const Formula& phi);

// R over copy indices -> its image under the copy-to-origin projection.
Formula project_to_origin(const Flattening& F, const Formula& R);

enum class TraceCheck { Holds, Unknown };

// Sufficient condition for traces(M1, phi) = traces(N, phi): phi is seeded at
// one start copy per origin control, the forward closure R inside N must be
// precise, and wherever R enables an origin transition the owning copy must
// carry an edge for it. Holds is trustworthy; Unknown is not a refutation.
TraceCheck trace_inclusion_check(const CounterSystem& M1, const Flattening& N,
                                 const Formula& phi, const Budget& budget);

}  // namespace psc

#endif
