#pragma once

#include "stlreach/formula.hpp"

#include <string>

namespace stlreach {

// Parses the textual formula grammar:
//   formula := disj
//   disj    := conj ('|' conj)*
//   conj    := unary ('&' unary)*
//   unary   := '!' unary | 'F' window unary | 'G' window unary
//            | atom ('U' window unary)?
//   window  := '[' number ',' number ']'
//   atom    := '(' formula ')' | 'true'
//            | linexpr ('>='|'<=') number
//            | 'inbox(' n ',' n ',' n ',' n ')'
// linexpr is a +/- separated sum of terms  [coef '*'] x<k>  over state
// variables x0..x{state_dim-1}. 'inbox(xmin,xmax,ymin,ymax)' expands to the
// four-face conjunction on dims 0 and 1. Whitespace-insensitive.
//
// Throws ParseError with line/column on syntax errors, ConfigError on
// dimension mismatches or inverted intervals.
Formula parse_formula(const std::string &text, int state_dim);

} // namespace stlreach
