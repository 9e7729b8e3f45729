#ifndef SYMRED_NORMALIZE_HPP
#define SYMRED_NORMALIZE_HPP

#include "symred/expr.hpp"
#include "symred/poly.hpp"

#include <optional>

namespace symred {

/// Canonical form: rational-function normal form over the atom set
/// (symbols, jets, transcendental subterms). Identical mathematical content
/// in the catalog's expression class maps to identical trees. On exact
/// arithmetic overflow the input is returned unchanged (best effort); zero
/// testing then falls back to numeric sampling in the verdict layer.
Expr normalize(const Expr& e);

enum class ZeroTest { Zero, NonZero, Inconclusive };

/// Exact zero test through the normal form.
ZeroTest is_zero_symbolic(const Expr& e);

/// Structural equality after normalization.
bool equal_normalized(const Expr& a, const Expr& b);

// Lower-level entry points, shared by coefficient collection.
RF normalize_rf(const Expr& e, AtomTable& tab);
Expr rf_to_expr(const RF& r, const AtomTable& tab);
Expr poly_to_expr(const Poly& p, const AtomTable& tab);

/// Collect coefficients of powers of `w` (which must normalize to a single
/// atom). Requires the denominator of `e` to be free of that atom. Returns
/// (power, coefficient) pairs sorted by power. Nullopt when `e` is not
/// polynomial in the atom or the atom appears in the denominator.
std::optional<std::vector<std::pair<Rational, Expr>>> collect_coefficients(const Expr& e,
                                                                           const Expr& w);

/// Extract the coefficient of each listed atom expression (to first power)
/// plus the remainder: e = sum_i coeff_i * atom_i + rest. Fails when e is
/// not affine in the atoms.
std::optional<std::pair<std::vector<Expr>, Expr>> split_affine(const Expr& e,
                                                               const std::vector<Expr>& atoms);

} // namespace symred

#endif
