#include "psc/reach.hpp"

#include <algorithm>
#include <functional>
#include <utility>

namespace psc {

namespace {

// Displacement vector of a transition when every counter update is x' = x + c
// (identity counts as c = 0). nullopt for bounded choices or any other shape.
std::optional<std::map<std::string, Int>> translation_of(const Transition& t,
                                                         const std::vector<std::string>& counters) {
  std::map<std::string, Int> d;
  for (const auto& c : counters) {
    auto it = t.actions.find(c);
    ActionSpec a = it == t.actions.end() ? ActionSpec{} : it->second;
    switch (a.kind) {
      case ActionSpec::Kind::Identity:
        d[c] = 0;
        break;
      case ActionSpec::Kind::Assign:
        if (a.expr.coeffs.size() == 1 && a.expr.coeff(c) == 1) {
          d[c] = a.expr.constant;
        } else {
          return std::nullopt;
        }
        break;
      case ActionSpec::Kind::Range:
        return std::nullopt;
    }
  }
  return d;
}

// The endpoint argument behind acceleration needs every guard literal to be
// monotone along the iterations, which holds for linear (in)equalities but not
// for divisibilities or disjunctions.
bool conjunction_of_linear_atoms(const Formula& f) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return true;
    case Fk::Atom:
      return f->atom.kind != AtomKind::DIV;
    case Fk::And:
      return conjunction_of_linear_atoms(f->a) && conjunction_of_linear_atoms(f->b);
    default:
      return false;
  }
}

Formula shift_by(const Formula& g, const std::map<std::string, Int>& off) {
  std::map<std::string, LinearTerm> sub;
  for (const auto& [c, d] : off) {
    if (d == 0) continue;
    LinearTerm t = LinearTerm::variable(c);
    t.constant = d;
    sub[c] = t;
  }
  return sub.empty() ? g : substitute(g, sub);
}

std::map<int, int> scc_of(const CounterSystem& M) {
  std::map<int, std::vector<int>> adj;
  for (const auto& t : M.transitions) adj[t.source].push_back(t.target);
  std::map<int, int> index, low, comp;
  std::vector<int> stk;
  std::set<int> onstk;
  int idx = 0, ncomp = 0;
  std::function<void(int)> dfs = [&](int u) {
    index[u] = low[u] = idx++;
    stk.push_back(u);
    onstk.insert(u);
    for (int v : adj[u]) {
      if (!index.count(v)) {
        dfs(v);
        low[u] = std::min(low[u], low[v]);
      } else if (onstk.count(v)) {
        low[u] = std::min(low[u], index[v]);
      }
    }
    if (low[u] == index[u]) {
      for (;;) {
        int v = stk.back();
        stk.pop_back();
        onstk.erase(v);
        comp[v] = ncomp;
        if (v == u) break;
      }
      ++ncomp;
    }
  };
  for (int c : M.controls) {
    if (!index.count(c)) dfs(c);
  }
  return comp;
}

// Cycle structure of a flat system: which cycle (if any) each control lies on,
// and each cycle's transitions in traversal order.
struct FlatStructure {
  std::map<int, std::size_t> cycle_id;
  std::vector<std::vector<Transition>> cycles;
};

FlatStructure flat_structure(const CounterSystem& M) {
  auto comp = scc_of(M);
  std::map<int, const Transition*> internal_out;  // unique within a flat SCC
  for (const auto& t : M.transitions) {
    if (comp.at(t.source) == comp.at(t.target)) internal_out[t.source] = &t;
  }
  std::map<int, std::vector<int>> members;
  for (const auto& [node, c] : comp) members[c].push_back(node);
  FlatStructure fs;
  for (auto& [c, nodes] : members) {
    std::sort(nodes.begin(), nodes.end());
    if (nodes.size() == 1 && !internal_out.count(nodes[0])) continue;  // no cycle here
    std::vector<Transition> cyc;
    int u = nodes[0];
    do {
      const Transition* t = internal_out.at(u);
      cyc.push_back(*t);
      u = t->target;
    } while (u != nodes[0]);
    std::size_t id = fs.cycles.size();
    for (int v : nodes) fs.cycle_id[v] = id;
    fs.cycles.push_back(std::move(cyc));
  }
  return fs;
}

std::vector<Transition> rotate_cycle(const std::vector<Transition>& cyc, int entry) {
  std::size_t i = 0;
  while (i < cyc.size() && cyc[i].source != entry) ++i;
  std::vector<Transition> out(cyc.begin() + i, cyc.end());
  out.insert(out.end(), cyc.begin(), cyc.begin() + i);
  return out;
}

std::map<std::string, LinearTerm> primed_map(const CounterSystem& M) {
  std::map<std::string, LinearTerm> sub;
  sub[kControlVar] = LinearTerm::variable(primed(kControlVar));
  for (const auto& c : M.counters) sub[c] = LinearTerm::variable(primed(c));
  return sub;
}

std::map<std::string, LinearTerm> unprimed_map(const CounterSystem& M) {
  std::map<std::string, LinearTerm> sub;
  sub[primed(kControlVar)] = LinearTerm::variable(kControlVar);
  for (const auto& c : M.counters) sub[primed(c)] = LinearTerm::variable(c);
  return sub;
}

// States that reach F by some number of full iterations of the cycle.
Formula jump_pre(const CounterSystem& M, const AcceleratedCycle& a, const Formula& F,
                 const QeLimits& lim) {
  Formula fp = substitute(F, primed_map(M));
  std::vector<std::string> elim{a.n_var, primed(kControlVar)};
  for (const auto& c : M.counters) elim.push_back(primed(c));
  return eliminate_exists(elim, f_and(a.param_relation, fp), lim);
}

// States reached from F by some number of full iterations of the cycle.
Formula jump_post(const CounterSystem& M, const AcceleratedCycle& a, const Formula& F,
                  const QeLimits& lim) {
  std::vector<std::string> elim{a.n_var, kControlVar};
  for (const auto& c : M.counters) elim.push_back(c);
  Formula img = eliminate_exists(elim, f_and(a.param_relation, F), lim);
  return substitute(img, unprimed_map(M));
}

void collect_disjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f->kind == Fk::Or) {
    collect_disjuncts(f->a, out);
    collect_disjuncts(f->b, out);
  } else if (f->kind != Fk::False) {
    out.push_back(f);
  }
}

CheckResult star_fix(const CounterSystem& M, const Formula& phi, const Budget& budget,
                     bool forward) {
  QeLimits lim = budget.qe_limits();
  Stats st;
  std::vector<AcceleratedCycle> accels;
  for (const auto& cyc : simple_control_cycles(M)) {
    if (auto a = accelerate_cycle(cyc, M.counters)) accels.push_back(std::move(*a));
  }
  Formula R = simplify(phi);
  Formula F = R;  // frontier: the part of R not yet expanded
  std::size_t it = 0;
  auto settle = [&lim](const Formula& g) {
    try {
      return minimize(g, lim);
    } catch (const ResourceExhausted&) {
      return g;
    }
  };
  try {
    R = minimize(phi, lim);
    F = R;
    for (;;) {
      if (!budget.no_premature_stop && (budget.iterations_done(it) || budget.expired())) {
        st.ni = static_cast<long long>(it);
        return {settle(R), ApproxLabel::Under, st};
      }
      Formula P = forward ? post_image(M, F, lim) : pre_image(M, F, lim);
      for (const auto& a : accels) {
        P = f_or(P, forward ? jump_post(M, a, F, lim) : jump_pre(M, a, F, lim));
      }
      ++it;
      // Keep only the genuinely new part of the image as the next frontier;
      // re-expanding known states makes the iterates snowball syntactically.
      std::vector<Formula> parts, fresh;
      collect_disjuncts(minimize(P, lim), parts);
      for (const Formula& d : parts) {
        if (!is_satisfiable(f_and(d, f_not(R)), lim)) continue;
        fresh.push_back(d);
        R = simplify(f_or(R, d));
      }
      if (fresh.empty()) {
        st.ni = static_cast<long long>(it);
        return {settle(R), ApproxLabel::Precise, st};
      }
      F = simplify(f_or(fresh));
    }
  } catch (const ResourceExhausted&) {
    if (budget.no_premature_stop) throw;
    st.ni = static_cast<long long>(it);
    return {settle(R), ApproxLabel::Under, st};
  }
}

std::string gen_name(const std::string& c, int g) {
  return g == 0 ? c : c + "@" + std::to_string(g);
}

std::map<std::string, LinearTerm> gen_map(const std::vector<std::string>& counters, int g) {
  std::map<std::string, LinearTerm> sub;
  if (g == 0) return sub;
  for (const auto& c : counters) sub[c] = LinearTerm::variable(gen_name(c, g));
  return sub;
}

Formula at_generation(const Formula& f, const std::vector<std::string>& counters, int g) {
  auto sub = gen_map(counters, g);
  return sub.empty() ? f : substitute(f, sub);
}

}  // namespace

std::optional<AcceleratedCycle> accelerate_cycle(const std::vector<Transition>& cycle,
                                                 const std::vector<std::string>& counters) {
  if (cycle.empty()) throw SystemError("accelerate_cycle: empty cycle");
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (cycle[i].target != cycle[(i + 1) % cycle.size()].source)
      throw SystemError("accelerate_cycle: transitions do not chain into a cycle");
  }
  std::set<int> seen;
  for (const auto& t : cycle) {
    if (!seen.insert(t.source).second)
      throw SystemError("accelerate_cycle: control cycle is not simple");
  }

  const int s0 = cycle.front().source;
  std::map<std::string, Int> prefix;
  for (const auto& c : counters) prefix[c] = 0;
  std::vector<Formula> guard_parts;
  for (const auto& t : cycle) {
    Formula g = simplify(substitute_var(t.user_guard, kControlVar, LinearTerm(Int(t.source))));
    if (!conjunction_of_linear_atoms(g)) return std::nullopt;
    guard_parts.push_back(shift_by(g, prefix));
    auto d = translation_of(t, counters);
    if (!d) return std::nullopt;
    for (const auto& c : counters) prefix[c] += (*d)[c];
  }
  const std::map<std::string, Int> total = prefix;

  AcceleratedCycle out;
  out.cycle = cycle;
  out.displacement = total;
  out.entry = s0;
  out.n_var = fresh_var("n");
  const LinearTerm n = LinearTerm::variable(out.n_var);

  Formula at_entry =
      f_and(control_is(kControlVar, s0), control_is(primed(kControlVar), s0));

  std::vector<Formula> ident{f_eq(n), at_entry};  // n = 0, stay put
  for (const auto& c : counters)
    ident.push_back(t_eq(LinearTerm::variable(primed(c)), LinearTerm::variable(c)));

  // Guard of one full iteration seen from the entry state, and the same guard
  // shifted to the start of the last iteration, x + (n-1)*d.
  Formula G = f_and(guard_parts);
  std::map<std::string, LinearTerm> last_start;
  for (const auto& [c, d] : total) {
    if (d == 0) continue;
    LinearTerm t = LinearTerm::variable(c);
    t.add_coeff(out.n_var, d);
    t.constant -= d;
    last_start[c] = t;
  }
  Formula G_last = last_start.empty() ? G : substitute(G, last_start);

  std::vector<Formula> pos{t_ge(n, LinearTerm(Int(1))), at_entry, G, G_last};
  for (const auto& c : counters) {
    LinearTerm rhs = LinearTerm::variable(c);
    if (total.at(c) != 0) rhs.add_coeff(out.n_var, total.at(c));
    pos.push_back(t_eq(LinearTerm::variable(primed(c)), rhs));
  }

  out.param_relation = simplify(f_or(f_and(ident), f_and(pos)));
  return out;
}

std::vector<std::vector<Transition>> simple_control_cycles(const CounterSystem& M,
                                                           std::size_t cap) {
  std::map<int, std::vector<std::size_t>> adj;
  for (std::size_t i = 0; i < M.transitions.size(); ++i)
    adj[M.transitions[i].source].push_back(i);

  std::vector<std::vector<Transition>> out;
  std::vector<std::size_t> path;
  std::set<int> onpath;
  // Each cycle is reported once, rooted at its smallest control.
  std::function<void(int, int)> dfs = [&](int root, int u) {
    if (out.size() >= cap) return;
    for (std::size_t ti : adj[u]) {
      if (out.size() >= cap) return;
      const Transition& t = M.transitions[ti];
      if (t.target == root) {
        std::vector<Transition> cyc;
        for (std::size_t j : path) cyc.push_back(M.transitions[j]);
        cyc.push_back(t);
        out.push_back(std::move(cyc));
      } else if (t.target > root && !onpath.count(t.target)) {
        path.push_back(ti);
        onpath.insert(t.target);
        dfs(root, t.target);
        onpath.erase(t.target);
        path.pop_back();
      }
    }
  };
  for (int s : M.controls) {
    if (out.size() >= cap) break;
    onpath = {s};
    path.clear();
    dfs(s, s);
  }
  return out;
}

bool is_flat(const CounterSystem& M) {
  auto comp = scc_of(M);
  std::map<int, std::vector<int>> members;
  for (const auto& [node, c] : comp) members[c].push_back(node);
  std::map<int, int> outdeg;
  std::map<int, int> internal;
  for (const auto& t : M.transitions) {
    if (comp.at(t.source) == comp.at(t.target)) {
      ++outdeg[t.source];
      ++internal[comp.at(t.source)];
    }
  }
  for (const auto& [c, nodes] : members) {
    if (nodes.size() == 1) {
      if (internal.count(c) && internal.at(c) > 1) return false;  // parallel self-loops
    } else {
      // Exactly one internal cycle: every member has one internal successor.
      if (!internal.count(c) || internal.at(c) != static_cast<int>(nodes.size())) return false;
      for (int u : nodes) {
        if (!outdeg.count(u) || outdeg.at(u) != 1) return false;
      }
    }
  }
  return true;
}

CheckResult pre_star(const CounterSystem& M, const Formula& phi, const Budget& budget) {
  return star_fix(M, phi, budget, false);
}

CheckResult post_star(const CounterSystem& M, const Formula& phi, const Budget& budget) {
  return star_fix(M, phi, budget, true);
}

Formula pre_k_flat(const CounterSystem& N, const Formula& phi, const QeLimits& lim) {
  if (mentions_var(phi, kStepVar))
    throw SystemError("pre_k_flat: the target formula must not mention '" + kStepVar + "'");
  if (!is_flat(N)) throw SystemError("pre_k_flat: system is not flat");

  FlatStructure fs = flat_structure(N);
  std::map<int, AcceleratedCycle> accel_at;  // rotated so the entry control leads
  for (const auto& [ctrl, cid] : fs.cycle_id) {
    auto a = accelerate_cycle(rotate_cycle(fs.cycles[cid], ctrl), N.counters);
    if (!a)
      throw NotAccelerable("cycle through control " + std::to_string(ctrl) +
                           " is not a guarded translation");
    accel_at.emplace(ctrl, std::move(*a));
  }

  std::map<int, std::vector<std::size_t>> adj;
  for (std::size_t i = 0; i < N.transitions.size(); ++i)
    adj[N.transitions[i].source].push_back(i);

  std::vector<Formula> disjuncts;
  std::vector<std::size_t> path;  // transition indices of the current skeleton
  std::set<int> onpath;
  std::size_t emitted = 0;
  const std::size_t path_cap = 20000;

  auto emit = [&](int start) {
    if (++emitted > path_cap) throw ResourceExhausted(ResourceExhausted::Why::NodeBudget);
    std::vector<Formula> conj{control_is(kControlVar, start)};
    std::vector<std::string> elim;
    LinearTerm steps;  // transitions taken plus cycle rotations
    int gen = 0;
    int cur = start;
    auto maybe_rotate = [&](int node, bool is_entry) {
      if (!is_entry || !fs.cycle_id.count(node)) return;
      const AcceleratedCycle& a = accel_at.at(node);
      std::string nv = fresh_var("n");
      std::map<std::string, LinearTerm> sub;
      sub[a.n_var] = LinearTerm::variable(nv);
      sub[kControlVar] = LinearTerm(Int(node));
      sub[primed(kControlVar)] = LinearTerm(Int(node));
      for (const auto& c : N.counters) {
        sub[c] = LinearTerm::variable(gen_name(c, gen));
        sub[primed(c)] = LinearTerm::variable(gen_name(c, gen + 1));
      }
      conj.push_back(substitute(a.param_relation, sub));
      steps.add_coeff(nv, Int(a.cycle.size()));
      elim.push_back(nv);
      ++gen;
      for (const auto& c : N.counters) elim.push_back(gen_name(c, gen));
    };

    maybe_rotate(start, true);
    for (std::size_t ti : path) {
      const Transition& t = N.transitions[ti];
      Formula g = substitute_var(t.user_guard, kControlVar, LinearTerm(Int(t.source)));
      conj.push_back(at_generation(g, N.counters, gen));
      auto pre_vals = gen_map(N.counters, gen);
      for (const auto& c : N.counters) {
        auto it = t.actions.find(c);
        ActionSpec a = it == t.actions.end() ? ActionSpec{} : it->second;
        LinearTerm next = LinearTerm::variable(gen_name(c, gen + 1));
        switch (a.kind) {
          case ActionSpec::Kind::Identity:
            conj.push_back(t_eq(next, LinearTerm::variable(gen_name(c, gen))));
            break;
          case ActionSpec::Kind::Assign:
            conj.push_back(t_eq(next, a.expr.substituted(pre_vals)));
            break;
          case ActionSpec::Kind::Range:
            conj.push_back(t_ge(next, a.lo.substituted(pre_vals)));
            conj.push_back(t_le(next, a.hi.substituted(pre_vals)));
            break;
        }
      }
      steps.constant += 1;
      ++gen;
      for (const auto& c : N.counters) elim.push_back(gen_name(c, gen));
      // Entering a different cycle's control may allow rotations there.
      bool entry = !fs.cycle_id.count(t.source) ||
                   !fs.cycle_id.count(t.target) ||
                   fs.cycle_id.at(t.source) != fs.cycle_id.at(t.target);
      cur = t.target;
      maybe_rotate(cur, entry);
    }

    Formula target = substitute_var(phi, kControlVar, LinearTerm(Int(cur)));
    conj.push_back(at_generation(target, N.counters, gen));
    conj.push_back(f_eq(LinearTerm::variable(kStepVar) - steps));
    disjuncts.push_back(eliminate_exists(elim, f_and(conj), lim));
  };

  std::function<void(int, int)> dfs = [&](int start, int u) {
    emit(start);
    for (std::size_t ti : adj.count(u) ? adj.at(u) : std::vector<std::size_t>{}) {
      const Transition& t = N.transitions[ti];
      if (onpath.count(t.target)) continue;
      path.push_back(ti);
      onpath.insert(t.target);
      dfs(start, t.target);
      onpath.erase(t.target);
      path.pop_back();
    }
  };
  for (int s : N.controls) {
    path.clear();
    onpath = {s};
    dfs(s, s);
  }
  return minimize(f_or(disjuncts), lim);
}

Formula forall_k_closure(const Formula& f, const QeLimits& lim) {
  LinearTerm k = LinearTerm::variable(kStepVar);
  Formula body = f_implies(t_ge(k, LinearTerm(Int(0))), f);
  return minimize(eliminate_quantifiers(f_forall(kStepVar, body), lim), lim);
}

}  // namespace psc
