#pragma once

#include <string>

#include "qfi/expr.hpp"

namespace qfi {

// Prefix text form. Complete grammar (whitespace-separated tokens):
//
//   expr    := RATIONAL | SYMBOL | '(' form ')'
//   form    := '+' expr expr+            sum
//            | '*' expr expr+            product
//            | '^' expr RATIONAL         power, rational exponent only
//            | 'sin' expr | 'cos' expr | 'exp' expr | 'log' expr
//            | 'fn' NAME rule*           opaque function with bound rules
//            | 'fnref' NAME              reference to an enclosing 'fn'
//   rule    := '(' 'd' SYMBOL expr ')'   derivative of the fn w.r.t. SYMBOL
//   RATIONAL:= '-'? DIGITS ('/' DIGITS)?
//   SYMBOL  := [A-Za-z_][A-Za-z0-9_]* except the reserved words above
//
// 'fnref' resolves to the innermost open 'fn' with that name, which is how a
// rule can mention the function itself (d/dt E = phi * E). print/parse
// round-trips exactly: parse(print(e)) is structurally equal to e.
std::string print_expr(const Expr& e);

Expr parse_expr(const std::string& text);

}  // namespace qfi
