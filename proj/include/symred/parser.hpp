#ifndef SYMRED_PARSER_HPP
#define SYMRED_PARSER_HPP

#include "symred/expr.hpp"

#include <stdexcept>
#include <string>

namespace symred {

/// Syntax or resolution error, with the offset into the input text.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    size_t position;
};

/// Parse an expression against the declarations in `table`.
///
/// Grammar: identifiers [a-zA-Z][a-zA-Z0-9]*; jets as suffix form `u_xx`,
/// `u_xt` (suffix letters matched greedily against the field's independents)
/// or `D(u;x,2;t,1)`; `+ - * / ^` with the usual precedence and a right
/// associative `^`; unary minus; functions exp ln sqrt sin cos sinh cosh
/// tanh; `Int(dummy, lo, hi, integrand)`; `Anti(integrand, var)`; opaque
/// calls `A1(e1,e2)` and formal partials `d(A1,1)(e1,e2)` (repeated indices
/// give higher partials). Whitespace is insignificant.
Expr parse(const std::string& text, const SymbolTable& table);

} // namespace symred

#endif
