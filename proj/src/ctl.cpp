#include "psc/ctl.hpp"

#include <cctype>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "psc/eg.hpp"
#include "psc/reach.hpp"

namespace psc {

namespace {

CtlFormula node(CtlOp op, Formula prop, CtlFormula a, CtlFormula b) {
  auto n = std::make_shared<CtlNode>();
  n->op = op;
  n->prop = std::move(prop);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_prop(const CtlFormula& f) { return f && f->op == CtlOp::Prop; }

void require(const CtlFormula& f, const char* who) {
  if (!f) throw std::invalid_argument(std::string(who) + ": null subformula");
}

}  // namespace

CtlFormula ctl_prop(Formula f) {
  if (!f) throw std::invalid_argument("ctl_prop: null formula");
  return node(CtlOp::Prop, std::move(f), nullptr, nullptr);
}

CtlFormula ctl_not(CtlFormula a) {
  require(a, "ctl_not");
  if (is_prop(a)) return ctl_prop(f_not(a->prop));
  return node(CtlOp::Not, nullptr, std::move(a), nullptr);
}

CtlFormula ctl_or(CtlFormula a, CtlFormula b) {
  require(a, "ctl_or");
  require(b, "ctl_or");
  if (is_prop(a) && is_prop(b)) return ctl_prop(f_or(a->prop, b->prop));
  return node(CtlOp::Or, nullptr, std::move(a), std::move(b));
}

CtlFormula ctl_and(CtlFormula a, CtlFormula b) {
  require(a, "ctl_and");
  require(b, "ctl_and");
  if (is_prop(a) && is_prop(b)) return ctl_prop(f_and(a->prop, b->prop));
  return ctl_not(ctl_or(ctl_not(std::move(a)), ctl_not(std::move(b))));
}

CtlFormula ctl_ex(CtlFormula a) {
  require(a, "ctl_ex");
  return node(CtlOp::EX, nullptr, std::move(a), nullptr);
}

CtlFormula ctl_eu(CtlFormula a, CtlFormula b) {
  require(a, "ctl_eu");
  require(b, "ctl_eu");
  return node(CtlOp::EU, nullptr, std::move(a), std::move(b));
}

CtlFormula ctl_eg(CtlFormula a) {
  require(a, "ctl_eg");
  return node(CtlOp::EG, nullptr, std::move(a), nullptr);
}

CtlFormula ctl_ef(CtlFormula a) { return ctl_eu(ctl_prop(f_true()), std::move(a)); }

CtlFormula ctl_ax(CtlFormula a) { return ctl_not(ctl_ex(ctl_not(std::move(a)))); }

CtlFormula ctl_ag(CtlFormula a) {
  return ctl_not(ctl_eu(ctl_prop(f_true()), ctl_not(std::move(a))));
}

CtlFormula ctl_af(CtlFormula a) { return ctl_not(ctl_eg(ctl_not(std::move(a)))); }

CtlFormula ctl_au(CtlFormula a, CtlFormula b) {
  require(a, "ctl_au");
  require(b, "ctl_au");
  CtlFormula nb = ctl_not(b);
  return ctl_not(ctl_or(ctl_eu(nb, ctl_and(ctl_not(std::move(a)), nb)), ctl_eg(nb)));
}

// --- surface syntax ----------------------------------------------------------

namespace {

// Recursive-descent property parser. The boolean connectives are shared
// between the property level and the state-formula level; since boolean
// combinations of plain state formulas fold back into a single Prop leaf,
// either reading yields the same tree, so leaves are simply parsed greedily:
// the longest prefix that the state-formula parser accepts wins.
struct PropParser {
  const std::string& s;
  std::size_t pos = 0;

  explicit PropParser(const std::string& text) : s(text) {}

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  void ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, 1, static_cast<int>(pos) + 1);
  }

  bool sym(const char* tok) {
    ws();
    std::size_t n = std::strlen(tok);
    if (s.compare(pos, n, tok) != 0) return false;
    pos += n;
    return true;
  }

  // Matches an alphabetic keyword at the current position, requiring a
  // non-identifier character after it.
  bool kw(const char* k) {
    ws();
    std::size_t n = std::strlen(k);
    if (s.compare(pos, n, k) != 0) return false;
    if (pos + n < s.size() && ident_char(s[pos + n])) return false;
    pos += n;
    return true;
  }

  // "E" or "A" immediately heading a bracketed until.
  bool until_head(const char* k) {
    std::size_t save = pos;
    if (!kw(k)) return false;
    ws();
    if (pos < s.size() && s[pos] == '[') {
      ++pos;
      return true;
    }
    pos = save;
    return false;
  }

  CtlFormula parse_implies() {
    CtlFormula a = parse_or();
    ws();
    if (pos + 1 < s.size() && s[pos] == '-' && s[pos + 1] == '>') {
      pos += 2;
      CtlFormula b = parse_implies();
      return ctl_or(ctl_not(a), b);
    }
    return a;
  }

  CtlFormula parse_or() {
    CtlFormula a = parse_and();
    while (sym("||")) a = ctl_or(a, parse_and());
    return a;
  }

  CtlFormula parse_and() {
    CtlFormula a = parse_unary();
    while (sym("&&")) a = ctl_and(a, parse_unary());
    return a;
  }

  CtlFormula parse_unary() {
    ws();
    if (pos < s.size() && s[pos] == '!' && !(pos + 1 < s.size() && s[pos + 1] == '=')) {
      ++pos;
      return ctl_not(parse_unary());
    }
    if (kw("EX")) return ctl_ex(parse_unary());
    if (kw("EG")) return ctl_eg(parse_unary());
    if (kw("EF")) return ctl_ef(parse_unary());
    if (kw("AX")) return ctl_ax(parse_unary());
    if (kw("AG")) return ctl_ag(parse_unary());
    if (kw("AF")) return ctl_af(parse_unary());
    if (until_head("E")) {
      CtlFormula a = parse_implies();
      if (!kw("U")) fail("expected 'U' inside E[ ... ]");
      CtlFormula b = parse_implies();
      if (!sym("]")) fail("expected ']' closing E[ ... ]");
      return ctl_eu(a, b);
    }
    if (until_head("A")) {
      CtlFormula a = parse_implies();
      if (!kw("U")) fail("expected 'U' inside A[ ... ]");
      CtlFormula b = parse_implies();
      if (!sym("]")) fail("expected ']' closing A[ ... ]");
      return ctl_au(a, b);
    }
    return parse_leaf_or_paren();
  }

  // End positions where a state-formula leaf could stop: before every
  // depth-zero property-level token and at the scan end. Tried longest first.
  std::vector<std::size_t> leaf_candidates() const {
    std::vector<std::size_t> ends;
    int depth = 0;
    std::size_t i = pos;
    while (i < s.size()) {
      char c = s[i];
      if (c == '(') {
        ++depth;
        ++i;
        continue;
      }
      if (c == ')') {
        if (depth == 0) break;
        --depth;
        ++i;
        continue;
      }
      if (depth > 0) {
        ++i;
        continue;
      }
      if (c == '[' || c == ']') break;
      if (c == '&' && i + 1 < s.size() && s[i + 1] == '&') {
        ends.push_back(i);
        i += 2;
        continue;
      }
      if (c == '|' && i + 1 < s.size() && s[i + 1] == '|') {
        ends.push_back(i);
        i += 2;
        continue;
      }
      if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
        ends.push_back(i);
        i += 2;
        continue;
      }
      if (c == '!' && !(i + 1 < s.size() && s[i + 1] == '=')) {
        ends.push_back(i);
        ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < s.size() && ident_char(s[j])) ++j;
        std::string word = s.substr(i, j - i);
        if (word == "EX" || word == "EG" || word == "EF" || word == "AX" ||
            word == "AG" || word == "AF" || word == "U") {
          ends.push_back(i);
        } else if (word == "E" || word == "A") {
          std::size_t k = j;
          while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
          if (k < s.size() && s[k] == '[') ends.push_back(i);
        }
        i = j;
        continue;
      }
      ++i;
    }
    ends.push_back(i);
    return ends;
  }

  CtlFormula parse_leaf_or_paren() {
    ws();
    if (pos >= s.size()) fail("expected a property");
    std::vector<std::size_t> ends = leaf_candidates();
    for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
      std::size_t end = *it;
      if (end <= pos) continue;
      try {
        Formula f = parse_formula(s.substr(pos, end - pos));
        pos = end;
        return ctl_prop(f);
      } catch (const ParseError&) {
      }
    }
    if (s[pos] == '(') {
      ++pos;
      CtlFormula f = parse_implies();
      if (!sym(")")) fail("expected ')'");
      return f;
    }
    fail("cannot parse a state formula here");
  }
};

}  // namespace

CtlFormula parse_property(const std::string& text) {
  PropParser p(text);
  CtlFormula f = p.parse_implies();
  p.ws();
  if (p.pos != text.size())
    throw ParseError("trailing input after property", 1, static_cast<int>(p.pos) + 1);
  return f;
}

std::string print_property(const CtlFormula& f) {
  require(f, "print_property");
  switch (f->op) {
    case CtlOp::Prop: return "(" + print_formula(f->prop) + ")";
    case CtlOp::Not: return "! " + print_property(f->a);
    case CtlOp::Or: return "(" + print_property(f->a) + " || " + print_property(f->b) + ")";
    case CtlOp::EX: return "EX " + print_property(f->a);
    case CtlOp::EU:
      return "E [ " + print_property(f->a) + " U " + print_property(f->b) + " ]";
    case CtlOp::EG: return "EG " + print_property(f->a);
  }
  return "?";
}

std::size_t property_depth(const CtlFormula& f) {
  if (!f) return 0;
  if (f->op == CtlOp::Prop) return 0;
  std::size_t d = property_depth(f->a);
  if (f->b) d = std::max(d, property_depth(f->b));
  return d + 1;
}

// --- driver -------------------------------------------------------------------

namespace {

std::string tag_string(ReachTag t) {
  switch (t) {
    case ReachTag::Exact: return "exact";
    case ReachTag::Over: return "over";
    case ReachTag::Under: return "under";
  }
  return "?";
}

// The reachability envelope used when intersecting answers: only a set known
// from above may restrict the state space, otherwise reachable states could
// be dropped while the label still claims precision. An under-approximate
// hint therefore degrades to `true` here.
Formula reach_envelope(const CounterSystem& M) {
  if (M.reach_hint &&
      (M.reach_hint->tag == ReachTag::Exact || M.reach_hint->tag == ReachTag::Over))
    return M.reach_hint->formula;
  return f_true();
}

std::size_t engine_ops(const CtlFormula& f) {
  if (!f) return 0;
  std::size_t n = engine_ops(f->a) + engine_ops(f->b);
  if (f->op == CtlOp::EU || f->op == CtlOp::EG) ++n;
  return n;
}

}  // namespace

CounterSystem prepare(const CounterSystem& M, ApproxLabel label, const Budget& budget,
                      Stats* stats) {
  CounterSystem Mc = complete_stuck(M);
  if (!Mc.reach_hint) {
    ReachHint hint;
    if (label == ApproxLabel::Precise) {
      Budget b = budget;
      b.no_premature_stop = true;
      try {
        CheckResult r = post_star(Mc, Mc.init, b);
        hint.formula = r.states;
        hint.tag = ReachTag::Exact;
      } catch (const ResourceExhausted&) {
        throw BudgetExceededPrecise();
      }
    } else {
      CheckResult r = post_star(Mc, Mc.init, budget);
      hint.formula = r.states;
      hint.tag = r.label == ApproxLabel::Precise ? ReachTag::Exact : ReachTag::Under;
    }
    Mc.reach_hint = hint;
  }
  if (stats) stats->reach_tag = tag_string(Mc.reach_hint->tag);
  if (Mc.reach_hint->tag == ReachTag::Exact) {
    // Restrict every guard to the reachable states. Only an exact set is safe
    // in both approximation directions; refine() drops the hint, so put it back.
    // The conjoined guards feed every later elimination, so compact them here.
    QeLimits lim = budget.qe_limits();
    ReachHint hint = *Mc.reach_hint;
    hint.formula = minimize(hint.formula, lim);
    Mc = refine(Mc, hint.formula);
    for (Transition& t : Mc.transitions) {
      t.user_guard = minimize(t.user_guard, lim);
      t.guard = f_and(t.user_guard, control_is(kControlVar, t.source));
    }
    Mc.reach_hint = hint;
  }
  return Mc;
}

CheckResult compute_until(const CounterSystem& M, const Formula& phi1, const Formula& phi2,
                          ApproxLabel label, const Budget& budget) {
  CounterSystem M1 = refine(M, simplify(phi1));
  if (label == ApproxLabel::Precise) {
    // A precise answer admits no fallback: run without premature stops and let
    // only the wall clock interrupt.
    Budget b = budget;
    b.no_premature_stop = true;
    try {
      return pre_star(M1, phi2, b);
    } catch (const ResourceExhausted&) {
      throw BudgetExceededPrecise();
    }
  }
  CheckResult r = pre_star(M1, phi2, budget);
  if (r.label == ApproxLabel::Precise || label == ApproxLabel::Under) return r;
  // Forced stop on an over request: anything on a witnessing path satisfies
  // one of the two formulas, so their union over the envelope bounds the
  // answer from above.
  CheckResult res;
  res.stats = r.stats;
  res.label = ApproxLabel::Over;
  res.states = minimize(f_and(reach_envelope(M), f_or(phi1, phi2)), budget.qe_limits());
  return res;
}

CheckResult compute_global(const CounterSystem& M, const Formula& phi, ApproxLabel label,
                           const Budget& budget, EngineOverride engine) {
  if (label == ApproxLabel::Under) return compute_global_under(M, phi, budget);
  if (label == ApproxLabel::Over) return compute_global_over(M, phi, budget);
  // Precise: either routine is sound once premature stops are forbidden; the
  // over engine terminates on more instances, so it is the default.
  Budget b = budget;
  b.no_premature_stop = true;
  try {
    CheckResult r = engine == EngineOverride::Under ? compute_global_under(M, phi, b)
                                                    : compute_global_over(M, phi, b);
    if (r.label != ApproxLabel::Precise) throw BudgetExceededPrecise();
    return r;
  } catch (const ResourceExhausted&) {
    throw BudgetExceededPrecise();
  }
}

CheckResult sat(const CounterSystem& M, const CtlFormula& psi, ApproxLabel label,
                const Budget& budget, EngineOverride engine) {
  require(psi, "sat");
  Formula reach = reach_envelope(M);
  QeLimits lim = budget.qe_limits();

  // The iteration allowance is shared evenly between the looping engine calls
  // so a deep nesting cannot starve its last operator.
  Budget ebudget = budget;
  if (budget.max_iterations) {
    std::size_t ops = std::max<std::size_t>(1, engine_ops(psi));
    ebudget.max_iterations = std::max<std::size_t>(1, budget.max_iterations / ops);
  }

  std::function<CheckResult(const CtlFormula&, ApproxLabel)> rec =
      [&](const CtlFormula& f, ApproxLabel want) -> CheckResult {
    CheckResult res;
    switch (f->op) {
      case CtlOp::Prop:
        res.states = simplify(f_and(reach, f->prop));
        res.label = ApproxLabel::Precise;
        return res;
      case CtlOp::Not: {
        CheckResult c = rec(f->a, lattice_negate(want));
        res.stats.absorb(c.stats);
        res.states = minimize(f_and(reach, f_not(c.states)), lim);
        res.label = lattice_negate(c.label);
        return res;
      }
      case CtlOp::Or: {
        CheckResult c1 = rec(f->a, want);
        CheckResult c2 = rec(f->b, want);
        res.stats.absorb(c1.stats);
        res.stats.absorb(c2.stats);
        res.states = simplify(f_or(c1.states, c2.states));
        res.label = lattice_join(c1.label, c2.label);
        return res;
      }
      case CtlOp::EX: {
        CheckResult c = rec(f->a, want);
        res.stats.absorb(c.stats);
        try {
          res.states = minimize(pre_image(M, c.states, lim), lim);
          res.label = c.label;
        } catch (const ResourceExhausted&) {
          if (want == ApproxLabel::Under) {
            res.states = f_false();
            res.label = ApproxLabel::Under;
          } else if (want == ApproxLabel::Over) {
            res.states = reach;
            res.label = ApproxLabel::Over;
          } else {
            throw;
          }
        }
        return res;
      }
      case CtlOp::EU: {
        CheckResult c1 = rec(f->a, want);
        CheckResult c2 = rec(f->b, want);
        CheckResult u = compute_until(M, c1.states, c2.states, want, ebudget);
        res.stats.absorb(c1.stats);
        res.stats.absorb(c2.stats);
        res.stats.absorb(u.stats);
        res.states = u.states;
        res.label = lattice_join(lattice_join(c1.label, c2.label), u.label);
        return res;
      }
      case CtlOp::EG: {
        CheckResult c = rec(f->a, want);
        CheckResult g = compute_global(M, c.states, want, ebudget, engine);
        res.stats.absorb(c.stats);
        res.stats.absorb(g.stats);
        res.states = g.states;
        res.label = lattice_join(c.label, g.label);
        return res;
      }
    }
    throw std::logic_error("sat: unknown property node");
  };

  try {
    return rec(psi, label);
  } catch (const ResourceExhausted&) {
    if (label == ApproxLabel::Precise) throw BudgetExceededPrecise();
    throw;
  }
}

}  // namespace psc
