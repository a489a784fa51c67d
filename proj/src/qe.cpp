#include "psc/qe.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace psc {

namespace {

using boost::multiprecision::lcm;

struct Ctx {
  const QeLimits& lim;
  std::size_t nodes = 0;
  std::size_t pulse = 0;

  void tick(std::size_t n = 1) {
    nodes += n;
    if (nodes > lim.node_budget) throw ResourceExhausted(ResourceExhausted::Why::NodeBudget);
    if (((++pulse) & 1023u) == 0 && lim.deadline &&
        std::chrono::steady_clock::now() > *lim.deadline)
      throw ResourceExhausted(ResourceExhausted::Why::Deadline);
  }
};

// --- negation normal form ----------------------------------------------
//
// Output uses only And/Or over literals, where a literal is an Atom or a
// negated divisibility atom. Negated inequalities are rewritten using
// !(t <= 0)  <=>  1 - t <= 0, and negated equalities are split into the
// disjunction of two strict sides. Quantifiers must have been eliminated
// from the input already.

Formula nnf(const Formula& f, bool pos, Ctx& ctx) {
  ctx.tick();
  switch (f->kind) {
    case Fk::True:
      return pos ? f_true() : f_false();
    case Fk::False:
      return pos ? f_false() : f_true();
    case Fk::Atom: {
      if (pos) return f;
      const Atom& a = f->atom;
      switch (a.kind) {
        case AtomKind::LE:
          return f_atom(Atom{AtomKind::LE, LinearTerm(1) - a.term, 0});
        case AtomKind::EQ:
          return f_or(f_atom(Atom{AtomKind::LE, a.term + LinearTerm(1), 0}),
                      f_atom(Atom{AtomKind::LE, LinearTerm(1) - a.term, 0}));
        case AtomKind::DIV:
          return f_not(f);
      }
      return f;
    }
    case Fk::Not:
      return nnf(f->a, !pos, ctx);
    case Fk::And:
      return pos ? f_and(nnf(f->a, true, ctx), nnf(f->b, true, ctx))
                 : f_or(nnf(f->a, false, ctx), nnf(f->b, false, ctx));
    case Fk::Or:
      return pos ? f_or(nnf(f->a, true, ctx), nnf(f->b, true, ctx))
                 : f_and(nnf(f->a, false, ctx), nnf(f->b, false, ctx));
    case Fk::Implies:
      return pos ? f_or(nnf(f->a, false, ctx), nnf(f->b, true, ctx))
                 : f_and(nnf(f->a, true, ctx), nnf(f->b, false, ctx));
    case Fk::Exists:
    case Fk::Forall:
      throw std::logic_error("nnf: unexpected quantifier");
  }
  throw std::logic_error("nnf: bad node");
}

// Rewrites every literal of an NNF matrix. fn receives the atom and whether
// it appears under a negation; it returns the replacement formula.
template <typename Fn>
Formula map_literals(const Formula& f, Ctx& ctx, Fn&& fn) {
  ctx.tick();
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return f;
    case Fk::Atom:
      return fn(f->atom, false);
    case Fk::Not:
      assert(f->a->kind == Fk::Atom);
      return fn(f->a->atom, true);
    case Fk::And:
      return f_and(map_literals(f->a, ctx, fn), map_literals(f->b, ctx, fn));
    case Fk::Or:
      return f_or(map_literals(f->a, ctx, fn), map_literals(f->b, ctx, fn));
    default:
      throw std::logic_error("map_literals: not in NNF");
  }
}

template <typename Fn>
void walk_literals(const Formula& f, Fn&& fn) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return;
    case Fk::Atom:
      fn(f->atom, false);
      return;
    case Fk::Not:
      fn(f->a->atom, true);
      return;
    case Fk::And:
    case Fk::Or:
      walk_literals(f->a, fn);
      walk_literals(f->b, fn);
      return;
    default:
      throw std::logic_error("walk_literals: not in NNF");
  }
}

// --- Cooper's procedure -------------------------------------------------

// Multiplies the x-part of every literal up to a common coefficient m, so the
// matrix speaks about y = m*x, then conjoins m | y.
Formula scale_matrix(const Formula& f, const std::string& x, const Int& m, Ctx& ctx) {
  Formula scaled = map_literals(f, ctx, [&](const Atom& a, bool neg) -> Formula {
    Int c = a.term.coeff(x);
    if (c == 0) return neg ? f_not(f_atom(a)) : f_atom(a);
    Int s = m / (c < 0 ? -c : c);
    Atom out = a;
    out.term = a.term.scaled(s);
    if (a.kind == AtomKind::DIV) out.divisor = a.divisor * s;
    return neg ? f_not(f_atom(out)) : f_atom(out);
  });
  if (m == 1) return scaled;
  LinearTerm y;
  y.add_coeff(x, m);
  return f_and(scaled, f_div(m, y));
}

// Replaces y (the x-term with coefficient +-m) by the term t in one literal.
Formula subst_y(const Atom& a, bool neg, const std::string& x, const Int& m,
                const LinearTerm& t) {
  Int c = a.term.coeff(x);
  if (c == 0) return neg ? f_not(f_atom(a)) : f_atom(a);
  assert(c == m || c == -m);
  LinearTerm rest = a.term;
  rest.add_coeff(x, -c);
  Atom out = a;
  out.term = rest + t.scaled(c == m ? 1 : -1);
  Formula g = f_atom(out);
  return neg ? f_not(g) : g;
}

// Same replacement, but at y -> -infinity (LE and EQ collapse to constants).
Formula subst_y_minus_inf(const Atom& a, bool neg, const std::string& x, const Int& m,
                          const LinearTerm& t) {
  Int c = a.term.coeff(x);
  if (c != 0 && a.kind != AtomKind::DIV) {
    // c == m: m*x + r <= 0 holds at -inf; c == -m: lower bound fails there.
    if (a.kind == AtomKind::EQ) return f_false();
    return c == m ? f_true() : f_false();
  }
  return subst_y(a, neg, x, m, t);
}

Formula subst_y_plus_inf(const Atom& a, bool neg, const std::string& x, const Int& m,
                         const LinearTerm& t) {
  Int c = a.term.coeff(x);
  if (c != 0 && a.kind != AtomKind::DIV) {
    if (a.kind == AtomKind::EQ) return f_false();
    return c == m ? f_false() : f_true();
  }
  return subst_y(a, neg, x, m, t);
}

Formula cooper_core(const std::string& x, const Formula& matrix, Ctx& ctx) {
  Int m = 1;
  walk_literals(matrix, [&](const Atom& a, bool) {
    Int c = a.term.coeff(x);
    if (c != 0) m = lcm(m, c < 0 ? -c : c);
  });

  Formula f = scale_matrix(matrix, x, m, ctx);

  // After scaling, every x-coefficient is +-m. Collect bound terms and the
  // period of the divisibility constraints.
  Int delta = 1;
  std::vector<LinearTerm> lowers, uppers;  // literal <=> lower < y, resp. y < upper
  walk_literals(f, [&](const Atom& a, bool) {
    Int c = a.term.coeff(x);
    if (c == 0) return;
    LinearTerm rest = a.term;
    rest.add_coeff(x, -c);
    if (a.kind == AtomKind::DIV) {
      delta = lcm(delta, a.divisor);
      return;
    }
    if (a.kind == AtomKind::EQ) {
      // y = -rest (c = m) or y = rest (c = -m); bound it from both sides.
      LinearTerm v = rest.scaled(c == m ? -1 : 1);
      lowers.push_back(v - LinearTerm(1));
      uppers.push_back(v + LinearTerm(1));
      return;
    }
    if (c == m)
      uppers.push_back(LinearTerm(1) - rest);  // y <= -rest
    else
      lowers.push_back(rest - LinearTerm(1));  // y >= rest
  });

  const bool minus_side = lowers.size() <= uppers.size();
  const std::vector<LinearTerm>& bounds = minus_side ? lowers : uppers;
  std::size_t matrix_sz = formula_size(f);

  std::vector<Formula> disjuncts;
  for (Int j = 1; j <= delta; ++j) {
    ctx.tick(matrix_sz);
    LinearTerm t(j);
    Formula d = map_literals(f, ctx, [&](const Atom& a, bool neg) {
      return minus_side ? subst_y_minus_inf(a, neg, x, m, t)
                        : subst_y_plus_inf(a, neg, x, m, t);
    });
    d = simplify(d);
    if (!is_false(d)) disjuncts.push_back(d);
  }
  for (const LinearTerm& b : bounds) {
    for (Int j = 1; j <= delta; ++j) {
      ctx.tick(matrix_sz);
      LinearTerm t = minus_side ? b + LinearTerm(j) : b - LinearTerm(j);
      Formula d = map_literals(f, ctx,
                               [&](const Atom& a, bool neg) { return subst_y(a, neg, x, m, t); });
      d = simplify(d);
      if (!is_false(d)) disjuncts.push_back(d);
    }
  }
  return f_or(disjuncts);
}

std::vector<Formula> flatten_and(const Formula& f) {
  std::vector<Formula> out, stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (g->kind == Fk::And) {
      stack.push_back(g->b);
      stack.push_back(g->a);
    } else {
      out.push_back(g);
    }
  }
  return out;
}

// exists x. f for an NNF matrix f.
Formula exists_nnf(const std::string& x, const Formula& f, Ctx& ctx) {
  ctx.tick();
  if (!mentions_var(f, x)) return f;
  if (f->kind == Fk::Or)
    return f_or(exists_nnf(x, f->a, ctx), exists_nnf(x, f->b, ctx));

  if (f->kind == Fk::And) {
    std::vector<Formula> parts = flatten_and(f);

    // x = t with unit coefficient: substitute t for x everywhere else.
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Formula& p = parts[i];
      if (p->kind != Fk::Atom || p->atom.kind != AtomKind::EQ) continue;
      Int c = p->atom.term.coeff(x);
      if (c != 1 && c != -1) continue;
      LinearTerm rest = p->atom.term;
      rest.add_coeff(x, -c);
      std::map<std::string, LinearTerm> sub{{x, rest.scaled(c == 1 ? -1 : 1)}};
      std::vector<Formula> rem;
      rem.reserve(parts.size() - 1);
      for (std::size_t k = 0; k < parts.size(); ++k)
        if (k != i) rem.push_back(substitute(parts[k], sub));
      ctx.tick(formula_size(f));
      return f_and(rem);
    }

    std::vector<Formula> with_x, without_x;
    for (const Formula& p : parts)
      (mentions_var(p, x) ? with_x : without_x).push_back(p);
    if (!without_x.empty())
      return f_and(f_and(without_x), exists_nnf(x, f_and(with_x), ctx));
  }
  return cooper_core(x, f, ctx);
}

Formula exists_qf(const std::string& x, const Formula& f, Ctx& ctx) {
  return simplify(exists_nnf(x, nnf(f, true, ctx), ctx));
}

Formula qe_rec(const Formula& f, Ctx& ctx) {
  ctx.tick();
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
    case Fk::Atom:
      return f;
    case Fk::Not:
      return f_not(qe_rec(f->a, ctx));
    case Fk::And:
      return f_and(qe_rec(f->a, ctx), qe_rec(f->b, ctx));
    case Fk::Or:
      return f_or(qe_rec(f->a, ctx), qe_rec(f->b, ctx));
    case Fk::Implies:
      return f_implies(qe_rec(f->a, ctx), qe_rec(f->b, ctx));
    case Fk::Exists:
      return exists_qf(f->var, qe_rec(f->a, ctx), ctx);
    case Fk::Forall:
      return simplify(f_not(exists_qf(f->var, f_not(qe_rec(f->a, ctx)), ctx)));
  }
  throw std::logic_error("qe_rec: bad node");
}

// Eliminates a set of variables from a quantifier-free formula, distributing
// over top-level disjunctions and preferring variables that can be removed by
// an equality substitution.
Formula elim_set(std::vector<std::string> vars, Formula g, Ctx& ctx) {
  for (;;) {
    std::vector<std::string> live;
    for (const std::string& v : vars)
      if (mentions_var(g, v)) live.push_back(v);
    if (live.empty()) return g;
    vars = std::move(live);

    if (g->kind == Fk::Or)
      return f_or(elim_set(vars, g->a, ctx), elim_set(vars, g->b, ctx));

    std::string pick = vars.front();
    if (g->kind == Fk::And && vars.size() > 1) {
      std::vector<Formula> parts = flatten_and(g);
      bool found = false;
      for (const Formula& p : parts) {
        if (p->kind != Fk::Atom || p->atom.kind != AtomKind::EQ) continue;
        for (const std::string& v : vars) {
          Int c = p->atom.term.coeff(v);
          if (c == 1 || c == -1) {
            pick = v;
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) {
        // fall back to the variable touching the fewest conjuncts
        std::size_t best = SIZE_MAX;
        for (const std::string& v : vars) {
          std::size_t n = 0;
          for (const Formula& p : parts)
            if (mentions_var(p, v)) ++n;
          if (n < best) {
            best = n;
            pick = v;
          }
        }
      }
    }

    g = exists_qf(pick, g, ctx);
    vars.erase(std::find(vars.begin(), vars.end(), pick));
  }
}

bool eval_qf(const Formula& f, const std::map<std::string, Int>& env) {
  switch (f->kind) {
    case Fk::True:
      return true;
    case Fk::False:
      return false;
    case Fk::Atom: {
      Int v = f->atom.term.evaluate(env);
      switch (f->atom.kind) {
        case AtomKind::LE:
          return v <= 0;
        case AtomKind::EQ:
          return v == 0;
        case AtomKind::DIV:
          return emod(v, f->atom.divisor) == 0;
      }
      return false;
    }
    case Fk::Not:
      return !eval_qf(f->a, env);
    case Fk::And:
      return eval_qf(f->a, env) && eval_qf(f->b, env);
    case Fk::Or:
      return eval_qf(f->a, env) || eval_qf(f->b, env);
    case Fk::Implies:
      return !eval_qf(f->a, env) || eval_qf(f->b, env);
    default:
      throw std::logic_error("eval_qf: quantifier");
  }
}

bool has_quantifier(const Formula& f) {
  switch (f->kind) {
    case Fk::Exists:
    case Fk::Forall:
      return true;
    case Fk::Not:
      return has_quantifier(f->a);
    case Fk::And:
    case Fk::Or:
    case Fk::Implies:
      return has_quantifier(f->a) || has_quantifier(f->b);
    default:
      return false;
  }
}

bool ground_truth(const Formula& f) {
  static const std::map<std::string, Int> empty;
  return eval_qf(f, empty);
}

// Picks a value for the only free variable v of the quantifier-free, known
// satisfiable formula h. Candidates are the boundary points of the atoms
// widened by the divisibility period, plus a window around zero.
Int pick_value(const Formula& h, const std::string& v) {
  Int delta = 1;
  std::set<Int> base{0};
  std::vector<Formula> stack{h};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    switch (g->kind) {
      case Fk::Atom: {
        const Atom& a = g->atom;
        Int c = a.term.coeff(v);
        if (a.kind == AtomKind::DIV) {
          delta = lcm(delta, a.divisor);
          break;
        }
        if (c == 0) break;
        LinearTerm rest = a.term;
        rest.add_coeff(v, -c);
        Int r = rest.evaluate({});
        // boundary of c*v + r (<= or =) 0
        base.insert(c > 0 ? floor_div(-r, c) : ceil_div(-r, c));
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
  std::set<Int> cands;
  for (const Int& b : base)
    for (Int j = -delta; j <= delta; ++j) cands.insert(b + j);
  for (const Int& c : cands) {
    std::map<std::string, Int> env{{v, c}};
    if (eval_qf(h, env)) return c;
  }
  throw std::logic_error("pick_value: no candidate satisfied a satisfiable formula");
}

}  // namespace

Formula eliminate_quantifiers(const Formula& f, const QeLimits& lim) {
  Ctx ctx{lim};
  return simplify(qe_rec(f, ctx));
}

Formula eliminate_exists(const std::vector<std::string>& vars, const Formula& f,
                         const QeLimits& lim) {
  Ctx ctx{lim};
  Formula g = simplify(qe_rec(f, ctx));
  return simplify(elim_set(vars, g, ctx));
}

bool evaluate(const Formula& f, const std::map<std::string, Int>& env, const QeLimits& lim) {
  for (const std::string& v : free_vars(f))
    if (!env.count(v)) throw UnboundVariable(v);
  if (!has_quantifier(f)) return eval_qf(f, env);
  std::map<std::string, LinearTerm> sub;
  for (const auto& [k, val] : env) sub.emplace(k, LinearTerm(val));
  Formula g = eliminate_quantifiers(substitute(f, sub), lim);
  return ground_truth(simplify(g));
}

SatResult check_sat(const Formula& f, const QeLimits& lim, bool want_witness) {
  Ctx ctx{lim};
  Formula g = simplify(qe_rec(f, ctx));
  std::vector<std::string> vars;
  for (const std::string& v : free_vars(g)) vars.push_back(v);

  // chain[i] = exists vars[i..]. g, so chain[0] is ground
  std::vector<Formula> chain(vars.size() + 1);
  chain[vars.size()] = g;
  for (std::size_t i = vars.size(); i-- > 0;)
    chain[i] = simplify(exists_qf(vars[i], chain[i + 1], ctx));

  SatResult res;
  res.sat = ground_truth(chain[0]);
  if (!res.sat || !want_witness) return res;

  std::map<std::string, LinearTerm> sub;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Formula h = simplify(substitute(chain[i + 1], sub));
    Int val = mentions_var(h, vars[i]) ? pick_value(h, vars[i]) : Int(0);
    res.witness[vars[i]] = val;
    sub.emplace(vars[i], LinearTerm(val));
  }
  return res;
}

bool is_satisfiable(const Formula& f, const QeLimits& lim) {
  return check_sat(f, lim, false).sat;
}

bool entails(const Formula& f1, const Formula& f2, const QeLimits& lim) {
  return !is_satisfiable(f_and(f1, f_not(f2)), lim);
}

bool equivalent(const Formula& f1, const Formula& f2, const QeLimits& lim) {
  return entails(f1, f2, lim) && entails(f2, f1, lim);
}

namespace {

// A literal of the normal form: an atom, negated only for divisibilities.
struct Lit {
  Atom atom;
  bool neg = false;
};

int compare_lit(const Lit& a, const Lit& b) {
  if (a.neg != b.neg) return a.neg ? 1 : -1;
  return compare(a.atom, b.atom);
}

// Does literal b imply literal a on its own?
bool lit_implies(const Lit& b, const Lit& a) {
  if (a.neg || b.neg) return a.neg == b.neg && a.atom == b.atom;
  switch (a.atom.kind) {
    case AtomKind::LE: {
      if (b.atom.kind == AtomKind::LE) {
        LinearTerm d = a.atom.term - b.atom.term;
        return d.is_constant() && d.constant <= 0;
      }
      if (b.atom.kind == AtomKind::EQ) {
        LinearTerm d1 = a.atom.term - b.atom.term;
        if (d1.is_constant() && d1.constant <= 0) return true;
        LinearTerm d2 = a.atom.term + b.atom.term;
        return d2.is_constant() && d2.constant <= 0;
      }
      return false;
    }
    case AtomKind::EQ:
      return b.atom.kind == AtomKind::EQ &&
             (a.atom.term == b.atom.term || a.atom.term == -b.atom.term);
    case AtomKind::DIV:
      return a.atom == b.atom;
  }
  return false;
}

constexpr std::size_t kMinimizeBranchCap = 256;

// Two literals with no satisfying assignment in common, detected by constant
// arithmetic alone (t <= 0 and s <= 0 clash when t + s is a positive
// constant, and so on). Sound but deliberately incomplete.
bool lit_contradicts(const Lit& a, const Lit& b) {
  if (a.neg || b.neg) return false;
  const Atom& x = a.atom;
  const Atom& y = b.atom;
  if (x.kind == AtomKind::DIV || y.kind == AtomKind::DIV) return false;
  if (x.kind == AtomKind::LE && y.kind == AtomKind::LE) {
    LinearTerm s = x.term + y.term;
    return s.is_constant() && s.constant > 0;
  }
  if (x.kind == AtomKind::EQ && y.kind == AtomKind::EQ) {
    LinearTerm d = x.term - y.term;
    if (d.is_constant() && d.constant != 0) return true;
    LinearTerm s = x.term + y.term;
    return s.is_constant() && s.constant != 0;
  }
  const Atom& eq = x.kind == AtomKind::EQ ? x : y;
  const Atom& le = x.kind == AtomKind::EQ ? y : x;
  if (eq.kind != AtomKind::EQ || le.kind != AtomKind::LE) return false;
  LinearTerm d = le.term - eq.term;
  if (d.is_constant() && d.constant > 0) return true;
  LinearTerm s = le.term + eq.term;
  return s.is_constant() && s.constant > 0;
}

// Sorts, dedups, drops literals implied by another, and reports outright
// contradictions. Returns false when the conjunction is infeasible.
bool norm_conj(std::vector<Lit>& c) {
  std::sort(c.begin(), c.end(),
            [](const Lit& a, const Lit& b) { return compare_lit(a, b) < 0; });
  c.erase(std::unique(c.begin(), c.end(),
                      [](const Lit& a, const Lit& b) { return compare_lit(a, b) == 0; }),
          c.end());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (lit_contradicts(c[i], c[j])) return false;
  std::vector<Lit> kept;
  for (std::size_t i = 0; i < c.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < c.size() && !dominated; ++j) {
      if (i == j || !lit_implies(c[j], c[i])) continue;
      // mutual implication means equivalent literals: keep the first
      dominated = !lit_implies(c[i], c[j]) || j < i;
    }
    if (!dominated) kept.push_back(c[i]);
  }
  c = std::move(kept);
  return true;
}

// conj(a) entails conj(b): every constraint of b follows from some literal
// of a, so in a disjunction the branch a is redundant next to b.
bool branch_implies(const std::vector<Lit>& a, const std::vector<Lit>& b) {
  for (const Lit& lb : b) {
    bool ok = false;
    for (const Lit& la : a) {
      if (lit_implies(la, lb)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

// Adds one branch to a disjunction under subsumption: the branch is dropped
// when an existing one already covers it, and it evicts the branches it
// covers. Keeping the set minimal here is what stops clause cross products
// from hitting the branch cap on formulas whose reduced form is small.
void insert_branch(std::vector<std::vector<Lit>>& out, std::vector<Lit>&& c) {
  for (const auto& o : out)
    if (branch_implies(c, o)) return;
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (branch_implies(out[r], c)) continue;
    if (w != r) out[w] = std::move(out[r]);
    ++w;
  }
  out.resize(w);
  out.push_back(std::move(c));
}

// DNF over literals with infeasible branches pruned as they are formed, so
// that negated disjunctions (a conjunction of clauses) do not blow up on
// combinations that contradict each other anyway. The cap applies to the
// surviving branches; hitting it or an unexpected node reports failure.
bool dnf_of(const Formula& f, std::vector<std::vector<Lit>>& out) {
  switch (f->kind) {
    case Fk::True:
      out.assign(1, {});
      return true;
    case Fk::False:
      out.clear();
      return true;
    case Fk::Atom:
      out.assign(1, {Lit{f->atom, false}});
      return true;
    case Fk::Not:
      if (f->a->kind != Fk::Atom || f->a->atom.kind != AtomKind::DIV) return false;
      out.assign(1, {Lit{f->a->atom, true}});
      return true;
    case Fk::Or: {
      std::vector<std::vector<Lit>> l, r;
      if (!dnf_of(f->a, l) || !dnf_of(f->b, r)) return false;
      out = std::move(l);
      for (auto& y : r) insert_branch(out, std::move(y));
      return out.size() <= kMinimizeBranchCap;
    }
    case Fk::And: {
      std::vector<std::vector<Lit>> l, r;
      if (!dnf_of(f->a, l) || !dnf_of(f->b, r)) return false;
      out.clear();
      for (const auto& x : l) {
        for (const auto& y : r) {
          std::vector<Lit> c = x;
          c.insert(c.end(), y.begin(), y.end());
          if (!norm_conj(c)) continue;
          insert_branch(out, std::move(c));
          if (out.size() > kMinimizeBranchCap) return false;
        }
      }
      return true;
    }
    default:
      return false;
  }
}

Formula lit_formula(const Lit& l) {
  Formula a = f_atom(l.atom);
  return l.neg ? f_not(a) : a;
}

Formula conj_formula(const std::vector<Lit>& c) {
  if (c.empty()) return f_true();
  std::vector<Formula> fs;
  fs.reserve(c.size());
  for (const Lit& l : c) fs.push_back(lit_formula(l));
  return f_and(fs);
}

}  // namespace

Formula minimize(const Formula& f, const QeLimits& lim) {
  Formula g = simplify(f);
  if (has_quantifier(g)) return g;
  Formula n;
  try {
    Ctx ctx{lim};
    n = nnf(g, true, ctx);
  } catch (const ResourceExhausted& e) {
    if (e.why == ResourceExhausted::Why::Deadline) throw;
    return g;
  }
  std::vector<std::vector<Lit>> dnf;
  if (!dnf_of(n, dnf)) return g;

  QeLimits small = lim;
  small.node_budget = std::min<std::size_t>(lim.node_budget, 2'000'000);
  auto feasible = [&](const Formula& c) {
    try {
      return is_satisfiable(c, small);
    } catch (const ResourceExhausted& e) {
      if (e.why == ResourceExhausted::Why::Deadline) throw;
      return true;  // undecided: keep the branch
    }
  };

  std::vector<std::vector<Lit>> keep;
  for (auto& c : dnf) {
    if (!norm_conj(c)) continue;
    if (!feasible(conj_formula(c))) continue;
    keep.push_back(std::move(c));
  }

  // Drop branches contained in another, then try to fuse pairs of branches
  // whose union is again a single conjunction: a one-literal branch absorbing
  // its integer complement (t <= 0 vs c - t <= 0 splits nothing when c <= 1)
  // and an equality point widening an interval bound next to it. Fusing opens
  // new subsumption opportunities, so alternate until nothing moves.
  std::vector<bool> dead(keep.size(), false);
  for (int round = 0; round < 16 && keep.size() <= 64; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      for (std::size_t j = 0; j < keep.size() && !dead[i]; ++j) {
        if (i == j || dead[j] || !branch_implies(keep[i], keep[j])) continue;
        dead[i] = !branch_implies(keep[j], keep[i]) || j < i;
        changed = changed || dead[i];
      }
    }
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (dead[i]) continue;
      for (std::size_t j = 0; j < keep.size() && !dead[i]; ++j) {
        if (i == j || dead[j]) continue;
        std::vector<Lit> a_only, b_only;
        for (const Lit& l : keep[i]) {
          bool shared = false;
          for (const Lit& m : keep[j]) shared = shared || compare_lit(l, m) == 0;
          if (!shared) a_only.push_back(l);
        }
        for (const Lit& l : keep[j]) {
          bool shared = false;
          for (const Lit& m : keep[i]) shared = shared || compare_lit(l, m) == 0;
          if (!shared) b_only.push_back(l);
        }
        if (a_only.size() != 1 || a_only[0].neg) continue;
        const Lit la = a_only[0];
        for (std::size_t bi = 0; bi < b_only.size(); ++bi) {
          const Lit lb = b_only[bi];
          if (lb.neg || lb.atom.kind != AtomKind::LE) continue;
          bool rest_ok = true;
          for (std::size_t bo = 0; bo < b_only.size() && rest_ok; ++bo)
            if (bo != bi) rest_ok = lit_implies(la, b_only[bo]);
          if (!rest_ok) continue;
          if (la.atom.kind == AtomKind::LE) {
            // t <= 0 or c - t <= 0: together exhaustive over the integers
            LinearTerm s = la.atom.term + lb.atom.term;
            if (!s.is_constant() || s.constant > 1) continue;
            std::vector<Lit> merged;
            for (const Lit& l : keep[j])
              if (compare_lit(l, lb) != 0) merged.push_back(l);
            keep[j] = std::move(merged);
            dead[i] = true;
            changed = true;
            break;
          }
          if (la.atom.kind == AtomKind::EQ) {
            // the point t = 0 sits right outside s <= 0: widen the bound by one
            LinearTerm d1 = lb.atom.term - la.atom.term;
            LinearTerm d2 = lb.atom.term + la.atom.term;
            bool adjacent = (d1.is_constant() && d1.constant == 1) ||
                            (d2.is_constant() && d2.constant == 1);
            if (!adjacent) continue;
            std::vector<Lit> merged;
            for (const Lit& l : keep[j])
              if (compare_lit(l, lb) != 0) merged.push_back(l);
            LinearTerm widened = lb.atom.term;
            widened.constant -= 1;
            Atom na;
            na.kind = AtomKind::LE;
            na.term = widened;
            merged.push_back(Lit{na, false});
            if (!norm_conj(merged)) continue;
            keep[j] = std::move(merged);
            dead[i] = true;
            changed = true;
            break;
          }
        }
      }
    }
    if (!changed) break;
  }

  std::vector<std::vector<Lit>> rest;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (!dead[i]) rest.push_back(std::move(keep[i]));
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      int c = compare_lit(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return false;
  });

  Formula out = f_false();
  for (auto it = rest.rbegin(); it != rest.rend(); ++it) out = f_or(conj_formula(*it), out);
  out = simplify(out);
  return formula_size(out) <= formula_size(g) ? out : g;
}

}  // namespace psc
