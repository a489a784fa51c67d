#include "psc/oracle.hpp"

#include <algorithm>
#include <deque>

namespace psc {

namespace {

// Extremal value of variable v in the quantifier-free single-variable formula
// h, or nullopt when h is unbounded on that side. Exploits the same fact as
// witness extraction: truth is determined by the atom boundaries up to the
// divisibility period.
std::optional<Int> extremum(const Formula& h, const std::string& v, bool want_min) {
  Int delta = 1;
  std::set<Int> bounds;
  std::vector<Formula> stack{h};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    switch (g->kind) {
      case Fk::Atom: {
        const Atom& a = g->atom;
        Int c = a.term.coeff(v);
        if (a.kind == AtomKind::DIV) {
          delta = boost::multiprecision::lcm(delta, a.divisor);
          break;
        }
        if (c == 0) break;
        LinearTerm rest = a.term;
        rest.add_coeff(v, -c);
        Int r = rest.evaluate({});
        bounds.insert(c > 0 ? floor_div(-r, c) : ceil_div(-r, c));
        break;
      }
      case Fk::Not:
        stack.push_back(g->a);
        break;
      case Fk::And:
      case Fk::Or:
      case Fk::Implies:
        stack.push_back(g->a);
        stack.push_back(g->b);
        break;
      default:
        break;
    }
  }
  if (bounds.empty()) bounds.insert(0);
  auto holds = [&](const Int& x) {
    std::map<std::string, Int> env{{v, x}};
    return evaluate(h, env);
  };
  // Beyond the outermost boundary truth is delta-periodic, so satisfiability
  // out there means no extremum on that side.
  Int edge = want_min ? *bounds.begin() : *bounds.rbegin();
  for (Int r = 1; r <= delta; ++r) {
    Int probe = want_min ? Int(edge - delta - r) : Int(edge + delta + r);
    if (holds(probe)) return std::nullopt;
  }
  std::optional<Int> best;
  for (const Int& b : bounds)
    for (Int j = -delta; j <= delta; ++j) {
      Int x = b + j;
      if (!holds(x)) continue;
      if (!best || (want_min ? x < *best : x > *best)) best = x;
    }
  return best;  // nullopt: formula unsatisfiable
}

}  // namespace

std::vector<StateVector> concrete_successors(const CounterSystem& M, const StateVector& s,
                                             std::size_t cap) {
  std::vector<StateVector> out;
  std::map<std::string, Int> env = state_env(s);
  for (const Transition& t : M.transitions) {
    if (t.source != s.control) continue;
    if (!evaluate(t.guard, env)) continue;
    // per-counter candidate values, then the cartesian product
    std::vector<std::pair<std::string, std::vector<Int>>> choices;
    bool feasible = true;
    std::size_t volume = 1;
    for (const std::string& c : M.counters) {
      const ActionSpec& a = t.actions.at(c);
      std::vector<Int> vals;
      switch (a.kind) {
        case ActionSpec::Kind::Identity:
          vals.push_back(s.vals.at(c));
          break;
        case ActionSpec::Kind::Assign:
          vals.push_back(a.expr.evaluate(env));
          break;
        case ActionSpec::Kind::Range: {
          Int lo = a.lo.evaluate(env), hi = a.hi.evaluate(env);
          if (hi - lo > Int(cap))
            throw CapExceeded("bounded update spans more than " + std::to_string(cap) +
                              " values");
          for (Int x = lo; x <= hi; ++x) vals.push_back(x);
          break;
        }
      }
      if (vals.empty()) {
        feasible = false;
        break;
      }
      volume *= vals.size();
      if (volume > cap) throw CapExceeded("successor set exceeds the cap");
      choices.emplace_back(c, std::move(vals));
    }
    if (!feasible) continue;
    std::vector<StateVector> partial{StateVector{t.target, {}}};
    for (const auto& [c, vals] : choices) {
      std::vector<StateVector> next;
      next.reserve(partial.size() * vals.size());
      for (const StateVector& p : partial)
        for (const Int& v : vals) {
          StateVector n = p;
          n.vals[c] = v;
          next.push_back(std::move(n));
        }
      partial = std::move(next);
    }
    for (StateVector& n : partial) out.push_back(std::move(n));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FiniteGraph explore(const CounterSystem& M, const Formula& from, std::size_t cap) {
  FiniteGraph G;
  Formula f0 = simplify(f_and(from, control_domain(M)));
  if (!is_false(f0) && is_satisfiable(f0)) {
    // Bound every variable of the seed set, then scan the resulting grid.
    std::vector<std::string> vars{kControlVar};
    for (const std::string& c : M.counters) vars.push_back(c);
    std::map<std::string, std::pair<Int, Int>> box;
    std::size_t volume = 1;
    for (const std::string& v : vars) {
      std::vector<std::string> others;
      for (const std::string& o : vars)
        if (o != v) others.push_back(o);
      Formula h = eliminate_exists(others, f0);
      auto lo = extremum(h, v, true), hi = extremum(h, v, false);
      if (!lo || !hi)
        throw CapExceeded("seed formula does not bound variable '" + v + "'");
      Int span = *hi - *lo + 1;
      if (span > Int(cap)) throw CapExceeded("seed box too large on '" + v + "'");
      volume *= static_cast<std::size_t>(span);
      if (volume > cap) throw CapExceeded("seed box exceeds the cap");
      box[v] = {*lo, *hi};
    }
    std::vector<StateVector> seeds;
    std::vector<StateVector> partial{StateVector{}};
    for (const std::string& v : vars) {
      std::vector<StateVector> next;
      for (const StateVector& p : partial)
        for (Int x = box[v].first; x <= box[v].second; ++x) {
          StateVector n = p;
          if (v == kControlVar)
            n.control = static_cast<int>(x);
          else
            n.vals[v] = x;
          next.push_back(std::move(n));
        }
      partial = std::move(next);
    }
    for (StateVector& s : partial)
      if (state_satisfies(s, f0)) seeds.push_back(std::move(s));

    std::deque<int> work;
    auto add = [&](StateVector s) {
      auto [it, fresh] = G.index.emplace(std::move(s), static_cast<int>(G.states.size()));
      if (fresh) {
        if (G.states.size() >= cap) throw CapExceeded("state graph exceeds the cap");
        G.states.push_back(it->first);
        G.succs.emplace_back();
        work.push_back(it->second);
      }
      return it->second;
    };
    for (StateVector& s : seeds) add(std::move(s));
    while (!work.empty()) {
      int i = work.front();
      work.pop_front();
      for (StateVector& n : concrete_successors(M, G.states[i], cap)) {
        int j = add(std::move(n));  // may grow G.succs; index before push
        G.succs[i].push_back(j);
      }
    }
  }
  G.complete = true;
  return G;
}

namespace {

using Mask = std::vector<char>;

std::set<int> to_set(const Mask& m) {
  std::set<int> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out.insert(static_cast<int>(i));
  return out;
}

Mask sat_mask(const FiniteGraph& G, const Formula& phi) {
  Mask m(G.states.size(), 0);
  for (std::size_t i = 0; i < G.states.size(); ++i)
    m[i] = state_satisfies(G.states[i], phi) ? 1 : 0;
  return m;
}

Mask pre_mask(const FiniteGraph& G, const Mask& m) {
  Mask out(G.states.size(), 0);
  for (std::size_t i = 0; i < G.states.size(); ++i)
    for (int j : G.succs[i])
      if (m[j]) {
        out[i] = 1;
        break;
      }
  return out;
}

Mask ctl_mask(const FiniteGraph& G, const CtlFormula& psi) {
  switch (psi->op) {
    case CtlOp::Prop:
      return sat_mask(G, psi->prop);
    case CtlOp::Not: {
      Mask m = ctl_mask(G, psi->a);
      for (auto& b : m) b = !b;
      return m;
    }
    case CtlOp::Or: {
      Mask m = ctl_mask(G, psi->a), r = ctl_mask(G, psi->b);
      for (std::size_t i = 0; i < m.size(); ++i) m[i] |= r[i];
      return m;
    }
    case CtlOp::EX:
      return pre_mask(G, ctl_mask(G, psi->a));
    case CtlOp::EU: {
      Mask a = ctl_mask(G, psi->a), s = ctl_mask(G, psi->b);
      bool changed = true;
      while (changed) {
        changed = false;
        Mask p = pre_mask(G, s);
        for (std::size_t i = 0; i < s.size(); ++i)
          if (!s[i] && a[i] && p[i]) {
            s[i] = 1;
            changed = true;
          }
      }
      return s;
    }
    case CtlOp::EG: {
      Mask s = ctl_mask(G, psi->a);
      bool changed = true;
      while (changed) {
        changed = false;
        Mask p = pre_mask(G, s);
        for (std::size_t i = 0; i < s.size(); ++i)
          if (s[i] && !p[i]) {
            s[i] = 0;
            changed = true;
          }
      }
      return s;
    }
  }
  throw std::logic_error("ctl_mask: bad node");
}

void need_complete(const FiniteGraph& G) {
  if (!G.complete) throw std::logic_error("oracle queries need a complete graph");
}

}  // namespace

std::set<int> oracle_sat_set(const FiniteGraph& G, const Formula& phi) {
  return to_set(sat_mask(G, phi));
}

std::set<int> oracle_ctl(const FiniteGraph& G, const CtlFormula& psi) {
  need_complete(G);
  return to_set(ctl_mask(G, psi));
}

std::set<int> oracle_pre_k(const FiniteGraph& G, const Formula& phi, std::size_t k) {
  need_complete(G);
  Mask m = sat_mask(G, phi);
  for (std::size_t i = 0; i < k; ++i) m = pre_mask(G, m);
  return to_set(m);
}

std::set<int> oracle_pre_star(const FiniteGraph& G, const Formula& phi) {
  need_complete(G);
  Mask s = sat_mask(G, phi);
  bool changed = true;
  while (changed) {
    changed = false;
    Mask p = pre_mask(G, s);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!s[i] && p[i]) {
        s[i] = 1;
        changed = true;
      }
  }
  return to_set(s);
}

std::set<int> oracle_post_star(const FiniteGraph& G, const Formula& phi) {
  need_complete(G);
  Mask s = sat_mask(G, phi);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i]) continue;
      for (int j : G.succs[i])
        if (!s[j]) {
          s[j] = 1;
          changed = true;
        }
    }
  }
  return to_set(s);
}

}  // namespace psc
