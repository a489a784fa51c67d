#include "psc/system.hpp"

#include <algorithm>
#include <sstream>

#include "psc/lexer.hpp"

namespace psc {

namespace {

// Every variable a state formula over this system may mention.
std::set<std::string> state_scope(const std::vector<std::string>& counters) {
  std::set<std::string> s(counters.begin(), counters.end());
  s.insert(kControlVar);
  return s;
}

void check_scope(const Formula& f, const std::set<std::string>& allowed,
                 const std::string& what) {
  for (const std::string& v : free_vars(f))
    if (!allowed.count(v))
      throw SystemError(what + " mentions unknown or out-of-scope variable '" + v + "'");
}

void check_term_scope(const LinearTerm& t, const std::set<std::string>& allowed,
                      const std::string& what) {
  for (const auto& [v, c] : t.coeffs) {
    (void)c;
    if (!allowed.count(v))
      throw SystemError(what + " mentions unknown or out-of-scope variable '" + v + "'");
  }
}

}  // namespace

std::string to_string(ReachTag t) {
  switch (t) {
    case ReachTag::Exact:
      return "exact";
    case ReachTag::Over:
      return "over";
    case ReachTag::Under:
      return "under";
  }
  return "?";
}

bool CounterSystem::has_control(int c) const {
  return std::binary_search(controls.begin(), controls.end(), c);
}

const Transition* CounterSystem::find_transition(const std::string& id) const {
  for (const Transition& t : transitions)
    if (t.id == id) return &t;
  return nullptr;
}

Transition make_transition(std::string id, int source, int target, Formula user_guard,
                           std::map<std::string, ActionSpec> actions,
                           const std::vector<std::string>& counters) {
  std::set<std::string> scope = state_scope(counters);
  check_scope(user_guard, scope, "guard of '" + id + "'");
  for (const auto& [name, spec] : actions) {
    if (!scope.count(name) || name == kControlVar)
      throw SystemError("action of '" + id + "' updates unknown counter '" + name + "'");
    if (spec.kind == ActionSpec::Kind::Assign)
      check_term_scope(spec.expr, scope, "action of '" + id + "'");
    if (spec.kind == ActionSpec::Kind::Range) {
      check_term_scope(spec.lo, scope, "action of '" + id + "'");
      check_term_scope(spec.hi, scope, "action of '" + id + "'");
    }
  }
  for (const std::string& c : counters)
    if (!actions.count(c)) actions[c] = ActionSpec{};  // identity

  Transition t;
  t.id = std::move(id);
  t.source = source;
  t.target = target;
  t.user_guard = user_guard;
  t.actions = std::move(actions);
  t.guard = f_and(user_guard, control_is(kControlVar, source));

  std::vector<Formula> rel;
  for (const std::string& c : counters) {
    const ActionSpec& a = t.actions.at(c);
    LinearTerm cp = LinearTerm::variable(primed(c));
    switch (a.kind) {
      case ActionSpec::Kind::Identity:
        rel.push_back(f_eq(cp - LinearTerm::variable(c)));
        break;
      case ActionSpec::Kind::Assign:
        rel.push_back(f_eq(cp - a.expr));
        break;
      case ActionSpec::Kind::Range:
        rel.push_back(f_le(a.lo - cp));
        rel.push_back(f_le(cp - a.hi));
        break;
    }
  }
  rel.push_back(control_is(primed(kControlVar), target));
  t.action = f_and(rel);
  return t;
}

Formula control_domain(const CounterSystem& M) {
  std::vector<Formula> ds;
  for (int c : M.controls) ds.push_back(control_is(kControlVar, c));
  return f_or(ds);
}

// --- parsing --------------------------------------------------------------

namespace {

struct SystemParser {
  const std::vector<Token>& toks;
  std::size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  bool at_ident(const std::string& s) const {
    return peek().kind == Token::Ident && peek().text == s;
  }
  bool eat_ident(const std::string& s) {
    if (!at_ident(s)) return false;
    ++pos;
    return true;
  }
  bool eat_sym(const std::string& s) {
    if (peek().kind != Token::Sym || peek().text != s) return false;
    ++pos;
    return true;
  }
  void expect_sym(const std::string& s) {
    if (!eat_sym(s)) fail("expected '" + s + "'");
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Token::Ident) fail("expected " + what);
    return toks[pos++].text;
  }
  int expect_control() {
    if (peek().kind != Token::Number) fail("expected a control-state number");
    const Int& v = toks[pos++].value;
    if (v < 0 || v > 1000000) fail("control-state number out of range");
    return static_cast<int>(v);
  }
  Formula formula() { return parse_formula_tokens(toks, pos); }
  LinearTerm term() { return parse_term_tokens(toks, pos); }
};

}  // namespace

CounterSystem parse_system(const std::string& text) {
  auto toks = tokenize(text);
  SystemParser p{toks};

  std::vector<std::string> counters;
  std::set<std::string> nats;
  std::vector<int> controls;
  Formula init;
  std::optional<ReachHint> hint;
  struct RawTransition {
    std::string id;
    int source, target;
    Formula guard;
    std::map<std::string, ActionSpec> actions;
  };
  std::vector<RawTransition> raw;

  bool saw_counters = false, saw_controls = false;
  while (p.peek().kind != Token::End) {
    if (p.eat_ident("counters")) {
      if (saw_counters) p.fail("duplicate counters section");
      saw_counters = true;
      do {
        bool nat = p.eat_ident("nat");
        std::string name = p.expect_ident("counter name");
        if (name == kControlVar) p.fail("'q' is reserved for the control state");
        if (name.find('\'') != std::string::npos) p.fail("counter names cannot be primed");
        if (std::find(counters.begin(), counters.end(), name) != counters.end())
          p.fail("duplicate counter '" + name + "'");
        counters.push_back(name);
        if (nat) nats.insert(name);
      } while (p.eat_sym(","));
      p.expect_sym(";");
      continue;
    }
    if (p.eat_ident("controls")) {
      if (saw_controls) p.fail("duplicate controls section");
      saw_controls = true;
      int first = p.expect_control();
      if (p.eat_sym("..")) {
        int last = p.expect_control();
        if (last < first) p.fail("empty control range");
        for (int c = first; c <= last; ++c) controls.push_back(c);
      } else {
        controls.push_back(first);
        while (p.eat_sym(",")) controls.push_back(p.expect_control());
      }
      p.expect_sym(";");
      continue;
    }
    if (p.eat_ident("init")) {
      if (init) p.fail("duplicate init section");
      p.expect_sym(":");
      init = p.formula();
      p.expect_sym(";");
      continue;
    }
    if (p.eat_ident("reach")) {
      if (hint) p.fail("duplicate reach section");
      p.expect_sym(":");
      Formula f = p.formula();
      p.expect_sym("(");
      std::string tag = p.expect_ident("reach tag (exact, over, or under)");
      p.expect_sym(")");
      p.expect_sym(";");
      ReachTag rt;
      if (tag == "exact")
        rt = ReachTag::Exact;
      else if (tag == "over")
        rt = ReachTag::Over;
      else if (tag == "under")
        rt = ReachTag::Under;
      else
        p.fail("reach tag must be exact, over, or under");
      hint = ReachHint{f, rt};
      continue;
    }
    if (p.eat_ident("transition")) {
      RawTransition t;
      t.id = p.expect_ident("transition id");
      if (!p.eat_ident("from")) p.fail("expected 'from'");
      t.source = p.expect_control();
      if (!p.eat_ident("to")) p.fail("expected 'to'");
      t.target = p.expect_control();
      if (!p.eat_ident("guard")) p.fail("expected 'guard'");
      t.guard = p.formula();
      if (p.eat_ident("action")) {
        do {
          // either  x' = term  or  term <= x' <= term
          if (p.peek().kind == Token::Ident && p.peek().text.size() > 1 &&
              p.peek().text.back() == '\'' && toks[p.pos + 1].kind == Token::Sym &&
              toks[p.pos + 1].text == "=") {
            std::string pname = p.expect_ident("counter");
            p.expect_sym("=");
            ActionSpec spec;
            spec.kind = ActionSpec::Kind::Assign;
            spec.expr = p.term();
            std::string base = pname.substr(0, pname.size() - 1);
            if (!t.actions.emplace(base, spec).second)
              p.fail("counter '" + base + "' updated twice");
          } else {
            ActionSpec spec;
            spec.kind = ActionSpec::Kind::Range;
            spec.lo = p.term();
            p.expect_sym("<=");
            std::string pname = p.expect_ident("primed counter");
            if (pname.size() < 2 || pname.back() != '\'')
              p.fail("bounded update needs a primed counter between the bounds");
            p.expect_sym("<=");
            spec.hi = p.term();
            std::string base = pname.substr(0, pname.size() - 1);
            if (!t.actions.emplace(base, spec).second)
              p.fail("counter '" + base + "' updated twice");
          }
        } while (p.eat_sym(","));
      }
      p.expect_sym(";");
      raw.push_back(std::move(t));
      continue;
    }
    p.fail("expected a section (counters, controls, init, transition, reach)");
  }

  if (controls.empty()) throw SystemError("system declares no control states");
  if (!init) throw SystemError("system has no init section");
  std::sort(controls.begin(), controls.end());
  controls.erase(std::unique(controls.begin(), controls.end()), controls.end());

  CounterSystem M;
  M.controls = std::move(controls);
  M.counters = std::move(counters);

  std::vector<Formula> natb;
  for (const std::string& n : nats) natb.push_back(f_le(-LinearTerm::variable(n)));
  Formula nat_bounds = f_and(natb);

  std::set<std::string> scope = state_scope(M.counters);
  check_scope(init, scope, "init");
  M.init = simplify(f_and(f_and(init, control_domain(M)), nat_bounds));

  std::set<std::string> ids;
  for (RawTransition& t : raw) {
    if (!ids.insert(t.id).second) throw SystemError("duplicate transition id '" + t.id + "'");
    if (!M.has_control(t.source) || !M.has_control(t.target))
      throw SystemError("transition '" + t.id + "' uses an undeclared control state");
    M.transitions.push_back(make_transition(t.id, t.source, t.target,
                                            f_and(t.guard, nat_bounds), std::move(t.actions),
                                            M.counters));
  }

  if (hint) {
    check_scope(hint->formula, scope, "reach");
    if (hint->tag == ReachTag::Exact && !entails(M.init, hint->formula))
      throw SystemError("exact reach hint does not contain the initial states");
    M.reach_hint = std::move(hint);
  }
  return M;
}

std::string print_system(const CounterSystem& M) {
  std::ostringstream os;
  if (!M.counters.empty()) {
    os << "counters ";
    for (std::size_t i = 0; i < M.counters.size(); ++i)
      os << (i ? ", " : "") << M.counters[i];
    os << ";\n";
  }
  bool contiguous = true;
  for (std::size_t i = 1; i < M.controls.size(); ++i)
    if (M.controls[i] != M.controls[i - 1] + 1) contiguous = false;
  os << "controls ";
  if (contiguous && M.controls.size() > 1) {
    os << M.controls.front() << ".." << M.controls.back();
  } else {
    for (std::size_t i = 0; i < M.controls.size(); ++i)
      os << (i ? ", " : "") << M.controls[i];
  }
  os << ";\n";
  os << "init: " << print_formula(M.init) << ";\n";
  for (const Transition& t : M.transitions) {
    os << "transition " << t.id << " from " << t.source << " to " << t.target << " guard "
       << print_formula(t.user_guard);
    std::vector<std::string> items;
    for (const std::string& c : M.counters) {
      const ActionSpec& a = t.actions.at(c);
      if (a.kind == ActionSpec::Kind::Identity) continue;
      if (a.kind == ActionSpec::Kind::Assign)
        items.push_back(primed(c) + " = " + print_term(a.expr));
      else
        items.push_back(print_term(a.lo) + " <= " + primed(c) + " <= " + print_term(a.hi));
    }
    if (!items.empty()) {
      os << " action ";
      for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << items[i];
    }
    os << ";\n";
  }
  if (M.reach_hint)
    os << "reach: " << print_formula(M.reach_hint->formula) << " ("
       << to_string(M.reach_hint->tag) << ");\n";
  return os.str();
}

// --- images ---------------------------------------------------------------

namespace {

std::vector<std::string> primed_vars(const CounterSystem& M) {
  std::vector<std::string> v{primed(kControlVar)};
  for (const std::string& c : M.counters) v.push_back(primed(c));
  return v;
}

std::map<std::string, LinearTerm> prime_map(const CounterSystem& M) {
  std::map<std::string, LinearTerm> m;
  m.emplace(kControlVar, LinearTerm::variable(primed(kControlVar)));
  for (const std::string& c : M.counters)
    m.emplace(c, LinearTerm::variable(primed(c)));
  return m;
}

std::map<std::string, LinearTerm> unprime_map(const CounterSystem& M) {
  std::map<std::string, LinearTerm> m;
  m.emplace(primed(kControlVar), LinearTerm::variable(kControlVar));
  for (const std::string& c : M.counters)
    m.emplace(primed(c), LinearTerm::variable(c));
  return m;
}

}  // namespace

Formula pre_image(const CounterSystem& M, const Formula& phi, const QeLimits& lim) {
  Formula phi_p = substitute(phi, prime_map(M));
  std::vector<std::string> pvars = primed_vars(M);
  std::vector<Formula> parts;
  for (const Transition& t : M.transitions) {
    Formula body = f_and(f_and(t.guard, t.action), phi_p);
    parts.push_back(eliminate_exists(pvars, body, lim));
  }
  return simplify(f_or(parts));
}

Formula post_image(const CounterSystem& M, const Formula& phi, const QeLimits& lim) {
  std::vector<std::string> uvars{kControlVar};
  for (const std::string& c : M.counters) uvars.push_back(c);
  auto unpr = unprime_map(M);
  std::vector<Formula> parts;
  for (const Transition& t : M.transitions) {
    Formula body = f_and(f_and(t.guard, t.action), phi);
    parts.push_back(substitute(eliminate_exists(uvars, body, lim), unpr));
  }
  return simplify(f_or(parts));
}

Formula stuck_states(const CounterSystem& M) {
  std::vector<Formula> gs;
  for (const Transition& t : M.transitions) gs.push_back(t.guard);
  return simplify(f_not(f_or(gs)));
}

CounterSystem complete_stuck(const CounterSystem& M) {
  Formula stuck = stuck_states(M);
  int dead = M.controls.empty() ? 0 : M.controls.back() + 1;

  CounterSystem out = M;
  out.controls.push_back(dead);

  auto unique_id = [&](std::string id) {
    while (M.find_transition(id)) id += "_";
    return id;
  };
  for (int c : M.controls) {
    Formula g = simplify(substitute_var(stuck, kControlVar, LinearTerm(c)));
    out.transitions.push_back(make_transition(unique_id("stuck_" + std::to_string(c)), c,
                                              dead, g, {}, M.counters));
  }
  out.transitions.push_back(
      make_transition(unique_id("dead"), dead, dead, f_true(), {}, M.counters));

  if (out.reach_hint) {
    // Stuck reachable states now step to their dead copy.
    Formula carried = eliminate_exists({kControlVar}, f_and(out.reach_hint->formula, stuck));
    out.reach_hint->formula = simplify(
        f_or(out.reach_hint->formula, f_and(control_is(kControlVar, dead), carried)));
  }
  return out;
}

CounterSystem refine(const CounterSystem& M, const Formula& phi) {
  CounterSystem out = M;
  out.reach_hint.reset();
  for (Transition& t : out.transitions) {
    t.user_guard = simplify(f_and(t.user_guard, phi));
    t.guard = f_and(t.user_guard, control_is(kControlVar, t.source));
  }
  return out;
}

// --- concrete states --------------------------------------------------------

std::string to_string(const StateVector& s) {
  std::ostringstream os;
  os << "(q=" << s.control;
  for (const auto& [k, v] : s.vals) os << ", " << k << "=" << v;
  os << ")";
  return os.str();
}

std::map<std::string, Int> state_env(const StateVector& s) {
  std::map<std::string, Int> env = s.vals;
  env[kControlVar] = s.control;
  return env;
}

bool state_satisfies(const StateVector& s, const Formula& phi) {
  return evaluate(phi, state_env(s));
}

bool step_exists(const CounterSystem& M, const StateVector& s, const StateVector& t) {
  std::map<std::string, Int> env = state_env(s);
  for (const auto& [k, v] : t.vals) env[primed(k)] = v;
  env[primed(kControlVar)] = t.control;
  for (const Transition& tr : M.transitions) {
    if (tr.source != s.control || tr.target != t.control) continue;
    if (evaluate(f_and(tr.guard, tr.action), env)) return true;
  }
  return false;
}

TraceSample::TraceSample(const CounterSystem& M, std::vector<StateVector> sts)
    : states(std::move(sts)) {
  if (states.empty()) throw SystemError("a trace needs at least one state");
  for (std::size_t i = 0; i + 1 < states.size(); ++i)
    if (!step_exists(M, states[i], states[i + 1]))
      throw SystemError("trace breaks at step " + std::to_string(i) + ": " +
                        to_string(states[i]) + " -> " + to_string(states[i + 1]));
}

}  // namespace psc
