#ifndef PSC_LEXER_HPP
#define PSC_LEXER_HPP

#include <string>
#include <vector>

#include "psc/presburger.hpp"

namespace psc {

// Shared tokenizer for the formula, property, and system-file syntaxes.
// `#` and `//` start line comments.
struct Token {
  enum Kind { Ident, Number, Sym, End } kind = End;
  std::string text;   // identifier (with primes) or symbol spelling
  Int value = 0;      // Number
  int line = 1, col = 1;
};

std::vector<Token> tokenize(const std::string& text);

// Entry points for grammars that embed formulas or linear terms in a larger
// token stream: parse starting at pos, leave pos just past the consumed
// tokens. Bound variables are renamed apart like in parse_formula.
Formula parse_formula_tokens(const std::vector<Token>& toks, std::size_t& pos);
LinearTerm parse_term_tokens(const std::vector<Token>& toks, std::size_t& pos);

}  // namespace psc

#endif
