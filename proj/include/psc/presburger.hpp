#ifndef PSC_PRESBURGER_HPP
#define PSC_PRESBURGER_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace psc {

using Int = boost::multiprecision::cpp_int;

// Floor/ceil division and euclidean remainder over arbitrary-precision integers.
Int floor_div(const Int& a, const Int& b);
Int ceil_div(const Int& a, const Int& b);
Int emod(const Int& a, const Int& b);

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg), line(line_), col(col_) {}
};

struct UnboundVariable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear expression: sum of coeff*var plus a constant. Zero coefficients are
// never stored.
struct LinearTerm {
  std::map<std::string, Int> coeffs;
  Int constant = 0;

  LinearTerm() = default;
  explicit LinearTerm(Int c) : constant(std::move(c)) {}

  static LinearTerm variable(const std::string& name, Int coeff = 1);

  Int coeff(const std::string& name) const;
  void add_coeff(const std::string& name, const Int& delta);
  bool is_constant() const { return coeffs.empty(); }
  bool mentions(const std::string& name) const { return coeffs.count(name) != 0; }

  LinearTerm operator+(const LinearTerm& o) const;
  LinearTerm operator-(const LinearTerm& o) const;
  LinearTerm operator-() const;
  LinearTerm scaled(const Int& k) const;

  // Replaces each occurrence of a mapped variable by its linear replacement.
  LinearTerm substituted(const std::map<std::string, LinearTerm>& map) const;

  Int evaluate(const std::map<std::string, Int>& env) const;

  bool operator==(const LinearTerm& o) const {
    return constant == o.constant && coeffs == o.coeffs;
  }
};

int compare(const LinearTerm& a, const LinearTerm& b);

enum class AtomKind {
  LE,   // term <= 0
  EQ,   // term = 0
  DIV,  // divisor | term, divisor >= 2
};

struct Atom {
  AtomKind kind = AtomKind::LE;
  LinearTerm term;
  Int divisor = 0;  // meaningful for DIV only

  bool operator==(const Atom& o) const {
    return kind == o.kind && divisor == o.divisor && term == o.term;
  }
};

int compare(const Atom& a, const Atom& b);

enum class Fk { True, False, Atom, Not, And, Or, Implies, Exists, Forall };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Fk kind;
  Atom atom;        // Fk::Atom
  Formula a, b;     // children: Not uses a; And/Or/Implies use a,b; quantifiers use a
  std::string var;  // Exists/Forall
};

// Builders. f_and/f_or fold True/False units; f_not folds constants and double
// negation. Everything else is structural.
Formula f_true();
Formula f_false();
Formula f_atom(Atom at);
Formula f_le(LinearTerm t);            // t <= 0
Formula f_eq(LinearTerm t);            // t = 0
Formula f_div(Int divisor, LinearTerm t);
Formula f_not(Formula f);
Formula f_and(Formula a, Formula b);
Formula f_or(Formula a, Formula b);
Formula f_and(const std::vector<Formula>& fs);
Formula f_or(const std::vector<Formula>& fs);
Formula f_implies(Formula a, Formula b);
Formula f_exists(const std::string& var, Formula body);
Formula f_forall(const std::string& var, Formula body);

// Comparison sugar over terms.
Formula t_le(const LinearTerm& a, const LinearTerm& b);
Formula t_lt(const LinearTerm& a, const LinearTerm& b);
Formula t_ge(const LinearTerm& a, const LinearTerm& b);
Formula t_gt(const LinearTerm& a, const LinearTerm& b);
Formula t_eq(const LinearTerm& a, const LinearTerm& b);
Formula t_ne(const LinearTerm& a, const LinearTerm& b);

// q = c for a control constant.
Formula control_is(const std::string& var, int value);

bool is_true(const Formula& f);
bool is_false(const Formula& f);

// Total structural order; 0 means structurally equal.
int compare(const Formula& a, const Formula& b);

std::set<std::string> free_vars(const Formula& f);
bool mentions_var(const Formula& f, const std::string& name);

// Capture-avoiding substitution of free occurrences. Bound variables that would
// capture a replacement are renamed first.
Formula substitute(const Formula& f, const std::map<std::string, LinearTerm>& map);
Formula substitute_var(const Formula& f, const std::string& from, const LinearTerm& to);

// Renames every bound variable to a globally fresh name (no shadowing anywhere
// in the result).
Formula standardize_apart(const Formula& f);
std::string fresh_var(const std::string& hint);

// Equivalence-preserving cleanup: folds constants, normalizes atoms by gcd,
// flattens and dedups And/Or, drops complementary pairs. Idempotent.
Formula simplify(const Formula& f);

std::string print_formula(const Formula& f);
std::string print_term(const LinearTerm& t);

// Parses the textual syntax: linear terms with + - *, comparisons
// <= < >= > = !=, divisibility `d | t`, connectives && || ! =>, quantifiers
// `exists x. (...)` / `forall x. (...)`, constants true/false. Primed variables
// carry a trailing ' (possibly repeated).
Formula parse_formula(const std::string& text);

// Number of nodes in the tree (atoms count 1).
std::size_t formula_size(const Formula& f);

inline std::string primed(const std::string& name) { return name + "'"; }

}  // namespace psc

#endif
