#include "psc/flatten.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>

#include "psc/reach.hpp"

namespace psc {

namespace {

// Flatness of a copy multigraph: every strongly connected component is a
// single simple cycle (or a trivial node with at most one self-loop).
bool flat_edges(int m, const std::vector<std::pair<int, int>>& es) {
  std::vector<std::vector<int>> adj(m);
  for (const auto& [s, d] : es) adj[s].push_back(d);
  std::vector<int> index(m, -1), low(m, 0), comp(m, -1), stk;
  std::vector<bool> onstk(m, false);
  int idx = 0, nc = 0;
  std::function<void(int)> dfs = [&](int u) {
    index[u] = low[u] = idx++;
    stk.push_back(u);
    onstk[u] = true;
    for (int v : adj[u]) {
      if (index[v] < 0) {
        dfs(v);
        low[u] = std::min(low[u], low[v]);
      } else if (onstk[v]) {
        low[u] = std::min(low[u], index[v]);
      }
    }
    if (low[u] == index[u]) {
      for (;;) {
        int v = stk.back();
        stk.pop_back();
        onstk[v] = false;
        comp[v] = nc;
        if (v == u) break;
      }
      ++nc;
    }
  };
  for (int u = 0; u < m; ++u)
    if (index[u] < 0) dfs(u);
  std::vector<int> size(nc, 0), internal(nc, 0), outdeg(m, 0);
  for (int u = 0; u < m; ++u) ++size[comp[u]];
  for (const auto& [s, d] : es) {
    if (comp[s] == comp[d]) {
      ++internal[comp[s]];
      ++outdeg[s];
    }
  }
  for (int c = 0; c < nc; ++c) {
    if (size[c] == 1) {
      if (internal[c] > 1) return false;
    } else if (internal[c] != size[c]) {
      return false;
    }
  }
  for (int u = 0; u < m; ++u)
    if (size[comp[u]] > 1 && outdeg[u] != 1) return false;
  return true;
}

// Representative key of the edge list under renumberings of same-origin
// copies (groups are contiguous index ranges). Equal keys always certify an
// isomorphism, because a key is the serialized edge list under some genuine
// group-preserving permutation. Copies are first ordered by an invariant
// signature of their incident edges; only ties are permuted exhaustively, and
// past the permutation cap the signature order alone is used, so occasional
// isomorphic duplicates survive. That costs re-analysis, never correctness.
std::string canonical_key(const std::vector<int>& origin_of_copy,
                          const std::vector<std::array<int, 3>>& edges,
                          const std::vector<std::pair<int, int>>& groups) {
  const int m = static_cast<int>(origin_of_copy.size());
  auto serialize = [&](const std::vector<int>& slot) {
    std::vector<int> sigma(m);
    for (int k = 0; k < m; ++k) sigma[slot[k]] = k;
    std::vector<std::array<int, 3>> rel;
    rel.reserve(edges.size());
    for (const auto& e : edges) rel.push_back({sigma[e[0]], e[1], sigma[e[2]]});
    std::sort(rel.begin(), rel.end());
    std::string s;
    for (int c : origin_of_copy) {
      s += std::to_string(c);
      s += ',';
    }
    s += '|';
    for (const auto& e : rel) {
      s += std::to_string(e[0]);
      s += ',';
      s += std::to_string(e[1]);
      s += ',';
      s += std::to_string(e[2]);
      s += ';';
    }
    return s;
  };

  // Signature: label, direction, other endpoint's origin per incident edge.
  std::vector<std::vector<std::array<int, 3>>> sig(m);
  for (const auto& e : edges) {
    if (e[0] == e[2]) {
      sig[e[0]].push_back({e[1], 2, origin_of_copy[e[0]]});
    } else {
      sig[e[0]].push_back({e[1], 0, origin_of_copy[e[2]]});
      sig[e[2]].push_back({e[1], 1, origin_of_copy[e[0]]});
    }
  }
  for (auto& s : sig) std::sort(s.begin(), s.end());

  std::vector<int> slot(m);  // slot[new index] = original copy index
  std::vector<std::pair<int, int>> blocks;  // tie runs, in new-index space
  for (const auto& [b, e] : groups) {
    std::vector<int> idx(e - b);
    std::iota(idx.begin(), idx.end(), b);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int c) { return sig[a] < sig[c]; });
    std::copy(idx.begin(), idx.end(), slot.begin() + b);
    for (int k = b; k < e;) {
      int r = k + 1;
      while (r < e && sig[slot[r]] == sig[slot[k]]) ++r;
      if (r - k > 1) blocks.emplace_back(k, r);
      k = r;
    }
  }

  long long perms = 1;
  for (const auto& [b, e] : blocks) {
    for (int i = 2; i <= e - b && perms <= 720; ++i) perms *= i;
  }
  std::string best = serialize(slot);
  if (perms > 720 || blocks.empty()) return best;

  std::function<void(std::size_t)> go = [&](std::size_t bi) {
    if (bi == blocks.size()) {
      std::string k = serialize(slot);
      if (k < best) best = k;
      return;
    }
    auto [b, e] = blocks[bi];
    std::sort(slot.begin() + b, slot.begin() + e);
    do {
      go(bi + 1);
    } while (std::next_permutation(slot.begin() + b, slot.begin() + e));
  };
  go(0);
  return best;
}

ActionSpec ground_control(const ActionSpec& a, int source) {
  ActionSpec out = a;
  std::map<std::string, LinearTerm> sub{{kControlVar, LinearTerm(Int(source))}};
  if (out.kind == ActionSpec::Kind::Assign && out.expr.mentions(kControlVar))
    out.expr = out.expr.substituted(sub);
  if (out.kind == ActionSpec::Kind::Range) {
    if (out.lo.mentions(kControlVar)) out.lo = out.lo.substituted(sub);
    if (out.hi.mentions(kControlVar)) out.hi = out.hi.substituted(sub);
  }
  return out;
}

}  // namespace

std::vector<Flattening> enumerate_flattenings(const CounterSystem& M1, std::size_t length,
                                              std::size_t max_count) {
  std::vector<Flattening> out;
  if (length < 1 || M1.controls.empty()) return out;
  const std::size_t T = M1.transitions.size();
  std::set<std::string> seen;

  auto full = [&]() { return max_count && out.size() >= max_count; };

  auto handle_composition = [&](const std::vector<std::size_t>& comp) {
    const std::size_t m =
        std::accumulate(comp.begin(), comp.end(), static_cast<std::size_t>(0));
    std::vector<int> origin_of_copy;
    std::vector<std::pair<int, int>> groups;
    for (std::size_t oi = 0; oi < comp.size(); ++oi) {
      if (!comp[oi]) continue;
      int b = static_cast<int>(origin_of_copy.size());
      for (std::size_t r = 0; r < comp[oi]; ++r) origin_of_copy.push_back(M1.controls[oi]);
      groups.emplace_back(b, static_cast<int>(origin_of_copy.size()));
    }

    std::vector<std::array<int, 3>> cands;
    for (int s = 0; s < static_cast<int>(m); ++s) {
      for (std::size_t ti = 0; ti < T; ++ti) {
        if (M1.transitions[ti].source != origin_of_copy[s]) continue;
        for (int d = 0; d < static_cast<int>(m); ++d) {
          if (M1.transitions[ti].target != origin_of_copy[d]) continue;
          cands.push_back({s, static_cast<int>(ti), d});
        }
      }
    }
    if (cands.size() < length) return;

    std::vector<std::array<int, 3>> chosen;
    std::vector<std::pair<int, int>> pairs;  // src,dst of chosen edges
    std::vector<int> outdeg(m, 0);
    int sinks = static_cast<int>(m);

    auto emit = [&]() {
      if (sinks != 0) return;
      std::string key = canonical_key(origin_of_copy, chosen, groups);
      if (!seen.insert(key).second) return;
      Flattening F;
      F.length = length;
      for (int j = 0; j < static_cast<int>(m); ++j) F.copy_of_control[j] = origin_of_copy[j];
      CounterSystem& S = F.system;
      S.counters = M1.counters;
      S.controls.resize(m);
      std::iota(S.controls.begin(), S.controls.end(), 0);
      int seq = 0;
      for (const auto& e : chosen) {
        const Transition& ot = M1.transitions[e[1]];
        std::string id = ot.id + "#" + std::to_string(seq++);
        Formula ug = substitute_var(ot.user_guard, kControlVar, LinearTerm(Int(ot.source)));
        std::map<std::string, ActionSpec> acts;
        for (const auto& [c, a] : ot.actions) acts[c] = ground_control(a, ot.source);
        S.transitions.push_back(make_transition(id, e[0], e[2], ug, acts, S.counters));
        F.copy_of_transition[id] = ot.id;
      }
      S.init = lift_to_copies(F, M1.init);
      out.push_back(std::move(F));
    };

    std::function<void(std::size_t)> pick = [&](std::size_t from) {
      if (full()) return;
      if (chosen.size() == length) {
        emit();
        return;
      }
      std::size_t need = length - chosen.size();
      if (static_cast<std::size_t>(sinks) > need) return;
      for (std::size_t i = from; i + need <= cands.size(); ++i) {
        const auto& e = cands[i];
        pairs.emplace_back(e[0], e[2]);
        if (flat_edges(static_cast<int>(m), pairs)) {
          chosen.push_back(e);
          if (!outdeg[e[0]]++) --sinks;
          pick(i + 1);
          if (!--outdeg[e[0]]) ++sinks;
          chosen.pop_back();
        }
        pairs.pop_back();
        if (full()) return;
      }
    };
    pick(0);
  };

  for (std::size_t m = 1; m <= length && !full(); ++m) {
    std::vector<std::size_t> comp(M1.controls.size(), 0);
    std::function<void(std::size_t, std::size_t)> comps = [&](std::size_t idx,
                                                              std::size_t left) {
      if (full()) return;
      if (idx + 1 == comp.size()) {
        comp[idx] = left;
        handle_composition(comp);
        return;
      }
      for (std::size_t v = 0; v <= left; ++v) {
        comp[idx] = v;
        comps(idx + 1, left - v);
      }
    };
    comps(0, m);
  }
  return out;
}

Formula lift_to_copies(const Flattening& F, const Formula& phi) {
  std::vector<Formula> ds;
  for (const auto& [j, c] : F.copy_of_control)
    ds.push_back(f_and(substitute_var(phi, kControlVar, LinearTerm(Int(c))),
                       control_is(kControlVar, j)));
  return simplify(f_or(ds));
}

Formula project_to_origin(const Flattening& F, const Formula& R) {
  std::vector<Formula> ds;
  for (const auto& [j, c] : F.copy_of_control)
    ds.push_back(f_and(substitute_var(R, kControlVar, LinearTerm(Int(j))),
                       control_is(kControlVar, c)));
  return simplify(f_or(ds));
}

TraceCheck trace_inclusion_check(const CounterSystem& M1, const Flattening& N,
                                 const Formula& phi, const Budget& budget) {
  QeLimits lim = budget.qe_limits();
  try {
    // One start copy per origin control: the smallest copy index.
    std::map<int, int> start_copy;
    for (const auto& [j, c] : N.copy_of_control)
      if (!start_copy.count(c)) start_copy[c] = j;
    for (int c : M1.controls) {
      if (!is_satisfiable(f_and(phi, control_is(kControlVar, c)), lim)) continue;
      if (!start_copy.count(c)) return TraceCheck::Unknown;
    }

    std::vector<Formula> seeds;
    for (const auto& [c, j] : start_copy)
      seeds.push_back(f_and(substitute_var(phi, kControlVar, LinearTerm(Int(c))),
                            control_is(kControlVar, j)));
    CheckResult R = post_star(N.system, simplify(f_or(seeds)), budget);
    if (R.label != ApproxLabel::Precise) return TraceCheck::Unknown;

    for (const auto& [j, c] : N.copy_of_control) {
      Formula Rj = substitute_var(R.states, kControlVar, LinearTerm(Int(j)));
      for (const Transition& t : M1.transitions) {
        if (t.source != c) continue;
        Formula g = substitute_var(t.user_guard, kControlVar, LinearTerm(Int(c)));
        if (!is_satisfiable(f_and(Rj, g), lim)) continue;
        bool covered = false;
        for (const Transition& ct : N.system.transitions) {
          if (ct.source == j && N.copy_of_transition.at(ct.id) == t.id) {
            covered = true;
            break;
          }
        }
        if (!covered) return TraceCheck::Unknown;
      }
    }
    return TraceCheck::Holds;
  } catch (const ResourceExhausted&) {
    if (budget.no_premature_stop) throw;
    return TraceCheck::Unknown;
  }
}

}  // namespace psc
