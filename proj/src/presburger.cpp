#include "psc/presburger.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <sstream>

#include "psc/lexer.hpp"

namespace psc {

Int floor_div(const Int& a, const Int& b) {
  assert(b != 0);
  Int q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) q -= 1;
  return q;
}

Int ceil_div(const Int& a, const Int& b) { return -floor_div(-a, b); }

Int emod(const Int& a, const Int& b) {
  Int m = a % b;
  if (m < 0) m += (b < 0 ? -b : b);
  return m;
}

// ---------------------------------------------------------------------------
// LinearTerm

LinearTerm LinearTerm::variable(const std::string& name, Int coeff) {
  LinearTerm t;
  if (coeff != 0) t.coeffs[name] = std::move(coeff);
  return t;
}

Int LinearTerm::coeff(const std::string& name) const {
  auto it = coeffs.find(name);
  return it == coeffs.end() ? Int(0) : it->second;
}

void LinearTerm::add_coeff(const std::string& name, const Int& delta) {
  if (delta == 0) return;
  Int& c = coeffs[name];
  c += delta;
  if (c == 0) coeffs.erase(name);
}

LinearTerm LinearTerm::operator+(const LinearTerm& o) const {
  LinearTerm r = *this;
  r.constant += o.constant;
  for (const auto& [v, c] : o.coeffs) r.add_coeff(v, c);
  return r;
}

LinearTerm LinearTerm::operator-(const LinearTerm& o) const { return *this + (-o); }

LinearTerm LinearTerm::operator-() const { return scaled(-1); }

LinearTerm LinearTerm::scaled(const Int& k) const {
  LinearTerm r;
  if (k == 0) return r;
  r.constant = constant * k;
  for (const auto& [v, c] : coeffs) r.coeffs[v] = c * k;
  return r;
}

LinearTerm LinearTerm::substituted(const std::map<std::string, LinearTerm>& map) const {
  LinearTerm r(constant);
  for (const auto& [v, c] : coeffs) {
    auto it = map.find(v);
    if (it == map.end())
      r.add_coeff(v, c);
    else
      r = r + it->second.scaled(c);
  }
  return r;
}

Int LinearTerm::evaluate(const std::map<std::string, Int>& env) const {
  Int r = constant;
  for (const auto& [v, c] : coeffs) {
    auto it = env.find(v);
    if (it == env.end()) throw UnboundVariable("no value for variable " + v);
    r += c * it->second;
  }
  return r;
}

int compare(const LinearTerm& a, const LinearTerm& b) {
  if (a.constant != b.constant) return a.constant < b.constant ? -1 : 1;
  auto ia = a.coeffs.begin(), ib = b.coeffs.begin();
  for (; ia != a.coeffs.end() && ib != b.coeffs.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
  }
  if (ia != a.coeffs.end()) return 1;
  if (ib != b.coeffs.end()) return -1;
  return 0;
}

int compare(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  if (a.divisor != b.divisor) return a.divisor < b.divisor ? -1 : 1;
  return compare(a.term, b.term);
}

// ---------------------------------------------------------------------------
// Builders

namespace {
Formula make(Fk kind) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  return n;
}
const Formula g_true = make(Fk::True);
const Formula g_false = make(Fk::False);
}  // namespace

Formula f_true() { return g_true; }
Formula f_false() { return g_false; }

bool is_true(const Formula& f) { return f->kind == Fk::True; }
bool is_false(const Formula& f) { return f->kind == Fk::False; }

Formula f_atom(Atom at) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Fk::Atom;
  n->atom = std::move(at);
  return n;
}

Formula f_le(LinearTerm t) {
  if (t.is_constant()) return t.constant <= 0 ? f_true() : f_false();
  return f_atom(Atom{AtomKind::LE, std::move(t), 0});
}

Formula f_eq(LinearTerm t) {
  if (t.is_constant()) return t.constant == 0 ? f_true() : f_false();
  return f_atom(Atom{AtomKind::EQ, std::move(t), 0});
}

Formula f_div(Int divisor, LinearTerm t) {
  assert(divisor >= 1);
  if (divisor == 1) return f_true();
  if (t.is_constant()) return emod(t.constant, divisor) == 0 ? f_true() : f_false();
  return f_atom(Atom{AtomKind::DIV, std::move(t), std::move(divisor)});
}

Formula f_not(Formula f) {
  if (is_true(f)) return f_false();
  if (is_false(f)) return f_true();
  if (f->kind == Fk::Not) return f->a;
  auto n = make(Fk::Not);
  const_cast<FormulaNode*>(n.get())->a = std::move(f);
  return n;
}

namespace {
Formula binary(Fk kind, Formula a, Formula b) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
}  // namespace

Formula f_and(Formula a, Formula b) {
  if (is_false(a) || is_false(b)) return f_false();
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  return binary(Fk::And, std::move(a), std::move(b));
}

Formula f_or(Formula a, Formula b) {
  if (is_true(a) || is_true(b)) return f_true();
  if (is_false(a)) return b;
  if (is_false(b)) return a;
  return binary(Fk::Or, std::move(a), std::move(b));
}

Formula f_and(const std::vector<Formula>& fs) {
  Formula r = f_true();
  for (const auto& f : fs) r = f_and(r, f);
  return r;
}

Formula f_or(const std::vector<Formula>& fs) {
  Formula r = f_false();
  for (const auto& f : fs) r = f_or(r, f);
  return r;
}

Formula f_implies(Formula a, Formula b) {
  if (is_false(a) || is_true(b)) return f_true();
  if (is_true(a)) return b;
  return binary(Fk::Implies, std::move(a), std::move(b));
}

Formula f_exists(const std::string& var, Formula body) {
  if (is_true(body) || is_false(body)) return body;
  auto n = make(Fk::Exists);
  auto* m = const_cast<FormulaNode*>(n.get());
  m->var = var;
  m->a = std::move(body);
  return n;
}

Formula f_forall(const std::string& var, Formula body) {
  if (is_true(body) || is_false(body)) return body;
  auto n = make(Fk::Forall);
  auto* m = const_cast<FormulaNode*>(n.get());
  m->var = var;
  m->a = std::move(body);
  return n;
}

Formula t_le(const LinearTerm& a, const LinearTerm& b) { return f_le(a - b); }
Formula t_lt(const LinearTerm& a, const LinearTerm& b) { return f_le(a - b + LinearTerm(1)); }
Formula t_ge(const LinearTerm& a, const LinearTerm& b) { return f_le(b - a); }
Formula t_gt(const LinearTerm& a, const LinearTerm& b) { return f_le(b - a + LinearTerm(1)); }
Formula t_eq(const LinearTerm& a, const LinearTerm& b) { return f_eq(a - b); }
Formula t_ne(const LinearTerm& a, const LinearTerm& b) { return f_not(t_eq(a, b)); }

Formula control_is(const std::string& var, int value) {
  return t_eq(LinearTerm::variable(var), LinearTerm(value));
}

// ---------------------------------------------------------------------------
// Structure

int compare(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
  switch (a->kind) {
    case Fk::True:
    case Fk::False:
      return 0;
    case Fk::Atom:
      return compare(a->atom, b->atom);
    case Fk::Not:
      return compare(a->a, b->a);
    case Fk::And:
    case Fk::Or:
    case Fk::Implies: {
      int c = compare(a->a, b->a);
      return c != 0 ? c : compare(a->b, b->b);
    }
    case Fk::Exists:
    case Fk::Forall: {
      if (a->var != b->var) return a->var < b->var ? -1 : 1;
      return compare(a->a, b->a);
    }
  }
  return 0;
}

namespace {
void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return;
    case Fk::Atom:
      for (const auto& [v, c] : f->atom.term.coeffs)
        if (!bound.count(v)) out.insert(v);
      return;
    case Fk::Not:
      collect_free(f->a, bound, out);
      return;
    case Fk::And:
    case Fk::Or:
    case Fk::Implies:
      collect_free(f->a, bound, out);
      collect_free(f->b, bound, out);
      return;
    case Fk::Exists:
    case Fk::Forall: {
      bool inserted = bound.insert(f->var).second;
      collect_free(f->a, bound, out);
      if (inserted) bound.erase(f->var);
      return;
    }
  }
}
}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

bool mentions_var(const Formula& f, const std::string& name) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return false;
    case Fk::Atom:
      return f->atom.term.mentions(name);
    case Fk::Not:
      return mentions_var(f->a, name);
    case Fk::And:
    case Fk::Or:
    case Fk::Implies:
      return mentions_var(f->a, name) || mentions_var(f->b, name);
    case Fk::Exists:
    case Fk::Forall:
      if (f->var == name) return false;
      return mentions_var(f->a, name);
  }
  return false;
}

std::string fresh_var(const std::string& hint) {
  static std::atomic<unsigned long long> counter{0};
  std::string base = hint.substr(0, hint.find('$'));
  if (base.empty()) base = "v";
  return base + "$" + std::to_string(counter.fetch_add(1));
}

Formula substitute(const Formula& f, const std::map<std::string, LinearTerm>& map) {
  if (map.empty()) return f;
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return f;
    case Fk::Atom: {
      Atom at = f->atom;
      at.term = at.term.substituted(map);
      switch (at.kind) {
        case AtomKind::LE:
          return f_le(std::move(at.term));
        case AtomKind::EQ:
          return f_eq(std::move(at.term));
        case AtomKind::DIV:
          return f_div(at.divisor, std::move(at.term));
      }
      return f;
    }
    case Fk::Not:
      return f_not(substitute(f->a, map));
    case Fk::And:
      return f_and(substitute(f->a, map), substitute(f->b, map));
    case Fk::Or:
      return f_or(substitute(f->a, map), substitute(f->b, map));
    case Fk::Implies:
      return f_implies(substitute(f->a, map), substitute(f->b, map));
    case Fk::Exists:
    case Fk::Forall: {
      auto inner = map;
      inner.erase(f->var);
      if (inner.empty()) return f;
      bool capture = false;
      for (const auto& [from, to] : inner) {
        (void)from;
        if (to.mentions(f->var)) capture = true;
      }
      Formula body = f->a;
      std::string var = f->var;
      if (capture) {
        var = fresh_var(f->var);
        body = substitute_var(body, f->var, LinearTerm::variable(var));
      }
      body = substitute(body, inner);
      return f->kind == Fk::Exists ? f_exists(var, body) : f_forall(var, body);
    }
  }
  return f;
}

Formula substitute_var(const Formula& f, const std::string& from, const LinearTerm& to) {
  return substitute(f, {{from, to}});
}

namespace {
Formula standardize(const Formula& f, std::map<std::string, LinearTerm>& renaming) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return f;
    case Fk::Atom:
      return substitute(f, renaming);
    case Fk::Not:
      return f_not(standardize(f->a, renaming));
    case Fk::And:
      return f_and(standardize(f->a, renaming), standardize(f->b, renaming));
    case Fk::Or:
      return f_or(standardize(f->a, renaming), standardize(f->b, renaming));
    case Fk::Implies:
      return f_implies(standardize(f->a, renaming), standardize(f->b, renaming));
    case Fk::Exists:
    case Fk::Forall: {
      std::string nv = fresh_var(f->var);
      auto saved = renaming.find(f->var) != renaming.end()
                       ? std::optional<LinearTerm>(renaming[f->var])
                       : std::nullopt;
      renaming[f->var] = LinearTerm::variable(nv);
      Formula body = standardize(f->a, renaming);
      if (saved)
        renaming[f->var] = *saved;
      else
        renaming.erase(f->var);
      return f->kind == Fk::Exists ? f_exists(nv, body) : f_forall(nv, body);
    }
  }
  return f;
}
}  // namespace

Formula standardize_apart(const Formula& f) {
  std::map<std::string, LinearTerm> renaming;
  return standardize(f, renaming);
}

std::size_t formula_size(const Formula& f) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
    case Fk::Atom:
      return 1;
    case Fk::Not:
    case Fk::Exists:
    case Fk::Forall:
      return 1 + formula_size(f->a);
    case Fk::And:
    case Fk::Or:
    case Fk::Implies:
      return 1 + formula_size(f->a) + formula_size(f->b);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Simplify

namespace {

using boost::multiprecision::gcd;

Formula normalize_atom(const Atom& at) {
  const LinearTerm& t = at.term;
  if (t.is_constant()) {
    switch (at.kind) {
      case AtomKind::LE:
        return t.constant <= 0 ? f_true() : f_false();
      case AtomKind::EQ:
        return t.constant == 0 ? f_true() : f_false();
      case AtomKind::DIV:
        return emod(t.constant, at.divisor) == 0 ? f_true() : f_false();
    }
  }
  Int g = 0;
  for (const auto& [v, c] : t.coeffs) g = gcd(g, c < 0 ? Int(-c) : c);
  switch (at.kind) {
    case AtomKind::LE: {
      // g*s + c <= 0  <=>  s <= floor(-c/g)
      if (g > 1) {
        LinearTerm s;
        for (const auto& [v, c] : t.coeffs) s.coeffs[v] = c / g;
        s.constant = -floor_div(-t.constant, g);
        return f_atom(Atom{AtomKind::LE, std::move(s), 0});
      }
      return f_atom(at);
    }
    case AtomKind::EQ: {
      LinearTerm s = t;
      if (g > 1) {
        if (t.constant % g != 0) return f_false();
        LinearTerm u;
        for (const auto& [v, c] : t.coeffs) u.coeffs[v] = c / g;
        u.constant = t.constant / g;
        s = std::move(u);
      }
      if (!s.coeffs.empty() && s.coeffs.begin()->second < 0) s = -s;
      return f_atom(Atom{AtomKind::EQ, std::move(s), 0});
    }
    case AtomKind::DIV: {
      Int d = at.divisor;
      LinearTerm s = t;
      Int e = gcd(g, d);
      if (e > 1) {
        if (s.constant % e != 0) return f_false();
        LinearTerm u;
        for (const auto& [v, c] : s.coeffs) u.coeffs[v] = c / e;
        u.constant = s.constant / e;
        s = std::move(u);
        d /= e;
      }
      if (d == 1) return f_true();
      LinearTerm u;
      for (const auto& [v, c] : s.coeffs) {
        Int m = emod(c, d);
        if (m != 0) u.coeffs[v] = m;
      }
      u.constant = emod(s.constant, d);
      if (u.coeffs.empty()) return u.constant == 0 ? f_true() : f_false();
      return f_atom(Atom{AtomKind::DIV, std::move(u), d});
    }
  }
  return f_atom(at);
}

// ¬f for an already-simplified f, staying simplified where it is cheap.
Formula negate_simplified(const Formula& f) {
  if (is_true(f)) return f_false();
  if (is_false(f)) return f_true();
  if (f->kind == Fk::Not) return f->a;
  if (f->kind == Fk::Atom && f->atom.kind == AtomKind::LE) {
    // ¬(t <= 0)  <=>  1 - t <= 0
    return normalize_atom(Atom{AtomKind::LE, LinearTerm(1) - f->atom.term, 0});
  }
  return f_not(f);
}

void flatten_into(Fk kind, const Formula& f, std::vector<Formula>& out) {
  if (f->kind == kind) {
    flatten_into(kind, f->a, out);
    flatten_into(kind, f->b, out);
  } else {
    out.push_back(f);
  }
}

struct FormulaLess {
  bool operator()(const Formula& a, const Formula& b) const { return compare(a, b) < 0; }
};

Formula simplify_rec(const Formula& f);

Formula simplify_junction(Fk kind, const Formula& f) {
  const bool conj = (kind == Fk::And);
  std::vector<Formula> parts;
  flatten_into(kind, f, parts);
  std::vector<Formula> items;
  for (const auto& p : parts) {
    Formula s = simplify_rec(p);
    if (conj ? is_false(s) : is_true(s)) return conj ? f_false() : f_true();
    if (conj ? is_true(s) : is_false(s)) continue;
    // Re-flatten: simplification may expose nested junctions of the same kind.
    if (s->kind == kind) {
      std::vector<Formula> nested;
      flatten_into(kind, s, nested);
      items.insert(items.end(), nested.begin(), nested.end());
    } else {
      items.push_back(s);
    }
  }
  std::sort(items.begin(), items.end(), FormulaLess{});
  items.erase(std::unique(items.begin(), items.end(),
                          [](const Formula& a, const Formula& b) { return compare(a, b) == 0; }),
              items.end());
  // Complementary pair: f together with ¬f collapses the junction.
  std::set<Formula, FormulaLess> index(items.begin(), items.end());
  for (const auto& it : items) {
    Formula neg = negate_simplified(it);
    if (index.count(neg)) return conj ? f_false() : f_true();
  }
  if (items.empty()) return conj ? f_true() : f_false();
  Formula r = items[0];
  for (std::size_t i = 1; i < items.size(); ++i)
    r = conj ? f_and(r, items[i]) : f_or(r, items[i]);
  return r;
}

Formula simplify_rec(const Formula& f) {
  switch (f->kind) {
    case Fk::True:
    case Fk::False:
      return f;
    case Fk::Atom:
      return normalize_atom(f->atom);
    case Fk::Not:
      return negate_simplified(simplify_rec(f->a));
    case Fk::And:
    case Fk::Or:
      return simplify_junction(f->kind, f);
    case Fk::Implies: {
      Formula a = simplify_rec(f->a);
      Formula b = simplify_rec(f->b);
      if (is_false(a) || is_true(b)) return f_true();
      if (is_true(a)) return b;
      if (is_false(b)) return negate_simplified(a);
      if (compare(a, b) == 0) return f_true();
      return f_implies(a, b);
    }
    case Fk::Exists:
    case Fk::Forall: {
      Formula body = simplify_rec(f->a);
      if (is_true(body) || is_false(body)) return body;
      if (!mentions_var(body, f->var)) return body;
      return f->kind == Fk::Exists ? f_exists(f->var, body) : f_forall(f->var, body);
    }
  }
  return f;
}

}  // namespace

Formula simplify(const Formula& f) { return simplify_rec(f); }

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string print_term_lhs(const LinearTerm& t) {
  // Variable part only, for `lhs <= c` style rendering.
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : t.coeffs) {
    Int a = c < 0 ? Int(-c) : c;
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (a != 1) os << a.str() << "*";
    os << v;
  }
  if (first) os << "0";
  return os.str();
}

int level(const Formula& f) {
  switch (f->kind) {
    case Fk::Implies:
      return 1;
    case Fk::Or:
      return 2;
    case Fk::And:
      return 3;
    case Fk::Not:
      return 4;
    default:
      return 5;
  }
}

void print_rec(const Formula& f, int min_level, std::ostringstream& os) {
  bool paren = level(f) < min_level;
  if (paren) os << "(";
  switch (f->kind) {
    case Fk::True:
      os << "true";
      break;
    case Fk::False:
      os << "false";
      break;
    case Fk::Atom: {
      const Atom& at = f->atom;
      switch (at.kind) {
        case AtomKind::LE:
          os << print_term_lhs(at.term) << " <= " << Int(-at.term.constant).str();
          break;
        case AtomKind::EQ:
          os << print_term_lhs(at.term) << " = " << Int(-at.term.constant).str();
          break;
        case AtomKind::DIV:
          os << at.divisor.str() << " | " << print_term(at.term);
          break;
      }
      break;
    }
    case Fk::Not:
      os << "!";
      print_rec(f->a, 5, os);
      break;
    case Fk::And:
      print_rec(f->a, 3, os);
      os << " && ";
      print_rec(f->b, 4, os);
      break;
    case Fk::Or:
      print_rec(f->a, 2, os);
      os << " || ";
      print_rec(f->b, 3, os);
      break;
    case Fk::Implies:
      print_rec(f->a, 2, os);
      os << " => ";
      print_rec(f->b, 1, os);
      break;
    case Fk::Exists:
    case Fk::Forall:
      os << "(" << (f->kind == Fk::Exists ? "exists " : "forall ") << f->var << ". ";
      print_rec(f->a, 0, os);
      os << ")";
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string print_term(const LinearTerm& t) {
  std::ostringstream os;
  os << print_term_lhs(t);
  if (t.constant != 0) {
    if (t.coeffs.empty())
      return t.constant.str();
    os << (t.constant < 0 ? " - " : " + ") << Int(t.constant < 0 ? -t.constant : t.constant).str();
  }
  return os.str();
}

std::string print_formula(const Formula& f) {
  std::ostringstream os;
  print_rec(f, 0, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.col = col;
    if (isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && isdigit(static_cast<unsigned char>(text[j]))) ++j;
      tok.kind = Token::Number;
      tok.text = text.substr(i, j - i);
      tok.value = Int(tok.text);
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < text.size() && (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                                 text[j] == '$'))
        ++j;
      while (j < text.size() && text[j] == '\'') ++j;  // primes
      tok.kind = Token::Ident;
      tok.text = text.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    static const char* two[] = {"..", "<=", ">=", "!=", "&&", "||", "=>", "->"};
    bool matched = false;
    for (const char* s : two) {
      if (text.compare(i, 2, s) == 0) {
        tok.kind = Token::Sym;
        tok.text = s;
        advance(2);
        out.push_back(std::move(tok));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string singles = "+-*()<>=!|.;,:[]";
    if (singles.find(c) != std::string::npos) {
      tok.kind = Token::Sym;
      tok.text = std::string(1, c);
      advance(1);
      out.push_back(std::move(tok));
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
  Token end;
  end.kind = Token::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Formula parser

namespace {

struct FormulaParser {
  const std::vector<Token>& toks;
  std::size_t pos = 0;

  explicit FormulaParser(const std::vector<Token>& t) : toks(t) {}

  const Token& peek() const { return toks[pos]; }
  const Token& get() { return toks[pos++]; }
  bool at_sym(const std::string& s) const {
    return peek().kind == Token::Sym && peek().text == s;
  }
  bool at_ident(const std::string& s) const {
    return peek().kind == Token::Ident && peek().text == s;
  }
  bool eat_sym(const std::string& s) {
    if (!at_sym(s)) return false;
    ++pos;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  void expect_sym(const std::string& s) {
    if (!eat_sym(s)) fail("expected '" + s + "'");
  }

  Formula parse() {
    Formula f = parse_implies();
    return f;
  }

  Formula parse_implies() {
    Formula l = parse_or();
    if (eat_sym("->") || eat_sym("=>")) return f_implies(l, parse_implies());
    return l;
  }

  Formula parse_or() {
    Formula l = parse_and();
    while (eat_sym("||")) l = f_or(l, parse_and());
    return l;
  }

  Formula parse_and() {
    Formula l = parse_unary();
    while (eat_sym("&&")) l = f_and(l, parse_unary());
    return l;
  }

  Formula parse_unary() {
    if (eat_sym("!")) return f_not(parse_unary());
    if (at_ident("true")) {
      ++pos;
      return f_true();
    }
    if (at_ident("false")) {
      ++pos;
      return f_false();
    }
    if (at_ident("exists") || at_ident("forall")) {
      bool ex = peek().text == "exists";
      ++pos;
      if (peek().kind != Token::Ident) fail("expected variable after quantifier");
      std::string var = get().text;
      expect_sym(".");
      Formula body = parse_implies();
      return ex ? f_exists(var, body) : f_forall(var, body);
    }
    if (at_sym("(")) {
      // `(` may open a parenthesized term inside a comparison or a
      // parenthesized formula; try the comparison first.
      std::size_t save = pos;
      try {
        return parse_comparison();
      } catch (const ParseError&) {
        pos = save;
      }
      expect_sym("(");
      Formula f = parse_implies();
      expect_sym(")");
      return f;
    }
    return parse_comparison();
  }

  Formula parse_comparison() {
    LinearTerm t1 = parse_term();
    if (at_sym("|")) {
      ++pos;
      if (!t1.is_constant() || t1.constant < 2)
        fail("divisibility requires a constant divisor >= 2");
      LinearTerm t2 = parse_term();
      return f_div(t1.constant, std::move(t2));
    }
    if (eat_sym("<=")) return t_le(t1, parse_term());
    if (eat_sym("<")) return t_lt(t1, parse_term());
    if (eat_sym(">=")) return t_ge(t1, parse_term());
    if (eat_sym(">")) return t_gt(t1, parse_term());
    if (eat_sym("=")) return t_eq(t1, parse_term());
    if (eat_sym("!=")) return t_ne(t1, parse_term());
    fail("expected comparison operator");
  }

  LinearTerm parse_term() {
    LinearTerm t = parse_addend();
    while (at_sym("+") || at_sym("-")) {
      bool plus = get().text == "+";
      LinearTerm r = parse_addend();
      t = plus ? t + r : t - r;
    }
    return t;
  }

  LinearTerm parse_addend() {
    LinearTerm t = parse_factor();
    while (at_sym("*")) {
      ++pos;
      LinearTerm r = parse_factor();
      if (t.is_constant())
        t = r.scaled(t.constant);
      else if (r.is_constant())
        t = t.scaled(r.constant);
      else
        fail("nonlinear product");
    }
    return t;
  }

  LinearTerm parse_factor() {
    if (eat_sym("-")) return -parse_factor();
    if (peek().kind == Token::Number) return LinearTerm(get().value);
    if (peek().kind == Token::Ident) {
      const std::string& name = peek().text;
      if (name == "true" || name == "false" || name == "exists" || name == "forall")
        fail("'" + name + "' is not a term");
      return LinearTerm::variable(get().text);
    }
    if (eat_sym("(")) {
      LinearTerm t = parse_term();
      expect_sym(")");
      return t;
    }
    fail("expected term");
  }
};

}  // namespace

Formula parse_formula(const std::string& text) {
  auto toks = tokenize(text);
  FormulaParser p(toks);
  Formula f = p.parse();
  if (p.peek().kind != Token::End)
    throw ParseError("trailing input after formula", p.peek().line, p.peek().col);
  return standardize_apart(f);
}

Formula parse_formula_tokens(const std::vector<Token>& toks, std::size_t& pos) {
  FormulaParser p(toks);
  p.pos = pos;
  Formula f = p.parse();
  pos = p.pos;
  return standardize_apart(f);
}

LinearTerm parse_term_tokens(const std::vector<Token>& toks, std::size_t& pos) {
  FormulaParser p(toks);
  p.pos = pos;
  LinearTerm t = p.parse_term();
  pos = p.pos;
  return t;
}

}  // namespace psc
