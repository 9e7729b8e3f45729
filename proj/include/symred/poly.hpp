#ifndef SYMRED_POLY_HPP
#define SYMRED_POLY_HPP

#include "symred/expr.hpp"

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace symred {

// Multivariate polynomial layer used by normalization. Variables are
// "atoms": symbols, jets, and maximal transcendental subterms interned in
// an AtomTable. Exponents are rational; atoms whose expression is a sum
// ("compound" atoms, i.e. radicals of polynomials) carry exponents in (0,1)
// and integer parts are expanded through their base polynomial, so e.g.
// sqrt(S)^2 collapses back to S.

/// Monomial: sorted (atom id, exponent) pairs, exponents nonzero.
using Monomial = std::vector<std::pair<int, Rational>>;

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

using Poly = std::map<Monomial, Rational, MonoLess>;

class AtomTable {
  public:
    /// Intern a canonical expression as an atom; returns its id.
    int intern(const Expr& canon);
    /// Intern a compound (sum) atom together with its expanded base polynomial.
    int intern_compound(const Expr& canon, const Poly& base);

    const Expr& expr_of(int id) const { return atoms_[id].canon; }
    /// Canonical string of the atom; independent of discovery order.
    const std::string& skey(int id) const { return atoms_[id].skey; }
    bool is_compound(int id) const { return atoms_[id].compound; }
    const Poly& base_poly(int id) const { return atoms_[id].base; }
    int size() const { return (int)atoms_.size(); }

  private:
    struct AtomInfo {
        Expr canon;
        std::string skey;
        Poly base;
        bool compound = false;
    };
    std::vector<AtomInfo> atoms_;
    std::unordered_map<size_t, std::vector<int>> index_;
};

// ---- polynomial operations -------------------------------------------------

Poly poly_zero();
Poly poly_const(const Rational& c);
Poly poly_atom(int id, const Rational& exp = Rational(1));

bool poly_is_zero(const Poly& p);
bool poly_is_const(const Poly& p);
/// Value of a constant polynomial (0 for the empty one).
Rational poly_const_value(const Poly& p);

void poly_add_term(Poly& p, const Monomial& m, const Rational& c);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_neg(const Poly& a);
Poly poly_scale(const Poly& a, const Rational& c);
Poly poly_mul(const Poly& a, const Poly& b, AtomTable& tab);
Poly poly_pow(const Poly& a, long long n, AtomTable& tab);

int poly_cmp(const Poly& a, const Poly& b);

/// Signed content: gcd of |coefficients| with the sign of the leading
/// coefficient under the table-internal monomial order; 0 for the zero
/// polynomial.
Rational poly_content(const Poly& p);
/// Positive content only (sign stays with the polynomial).
Rational poly_content_abs(const Poly& p);

/// Sign of the leading coefficient under a discovery-order-independent
/// monomial order (graded, then lexicographic on atom print keys). Used
/// wherever a canonical sign convention must survive re-normalization.
int poly_canonical_sign(const Poly& p, const AtomTable& tab);
/// Signed content with the canonical sign convention.
Rational poly_content_canonical(const Poly& p, const AtomTable& tab);

/// Exact division; nullopt when b does not divide a.
std::optional<Poly> poly_divide(const Poly& a, const Poly& b, AtomTable& tab);

/// Componentwise min of exponents over all monomials (the largest monomial
/// dividing every term). Empty for the zero polynomial.
Monomial poly_common_monomial(const Poly& p);
/// Divide every monomial by m (m must divide all of them).
Poly poly_shift_down(const Poly& p, const Monomial& m);

// ---- rational functions -----------------------------------------------------

/// Denominator kept in factored form: a coefficient-free monomial times
/// primitive polynomial factors with positive integer powers.
struct Den {
    Monomial mono;
    std::vector<std::pair<Poly, int>> factors;
    bool trivial() const { return mono.empty() && factors.empty(); }
};

struct RF {
    Poly num;
    Den den;
};

RF rf_const(const Rational& c);
bool rf_same_den(const Den& a, const Den& b);
/// Re-establish the RF invariants (cancellation, primitive factors) after
/// the numerator was edited in place.
void rf_collapse(RF& r, AtomTable& tab);
RF rf_atom(int id, const Rational& exp = Rational(1));
RF rf_from_poly(Poly p);

bool rf_is_zero(const RF& a);

RF rf_add(const RF& a, const RF& b, AtomTable& tab);
RF rf_neg(const RF& a);
RF rf_mul(const RF& a, const RF& b, AtomTable& tab);
RF rf_inverse(const RF& a, AtomTable& tab);
RF rf_pow_int(const RF& a, long long n, AtomTable& tab);

/// Expand the denominator into a single polynomial.
Poly den_expand(const Den& d, AtomTable& tab);

} // namespace symred

#endif
