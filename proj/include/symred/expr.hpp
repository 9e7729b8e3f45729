#ifndef SYMRED_EXPR_HPP
#define SYMRED_EXPR_HPP

#include "symred/rational.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace symred {

enum class SymKind {
    Independent,
    Parameter,
    Dummy, // integration variable, scoped to an integral
};

enum class Kind {
    Const,   // rational constant
    Symbol,  // independent variable or parameter
    Jet,     // dependent field derivative (orders all zero = the field itself)
    Add,     // n-ary sum
    Mul,     // n-ary product
    Pow,     // base^exponent, exponent a rational constant
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Opaque,   // opaque function application with formal partial orders
    Integral, // definite integral over a scoped dummy variable
    Antideriv // antiderivative in one variable, fixed at a base point
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node. Instances are created through the
/// builder functions below, shared freely, and never mutated.
struct ExprNode {
    Kind kind;
    Rational value;                   // Const; Pow exponent
    std::string name;                 // Symbol, Jet field, Opaque, Integral dummy, Antideriv var
    SymKind sk = SymKind::Parameter;  // Symbol only
    std::vector<std::string> indeps;  // Jet: field's independent variables
    std::vector<int> orders;          // Jet: derivative orders aligned with indeps
    std::vector<int> dorders;         // Opaque: formal partial orders per argument
    std::vector<Expr> kids;           // Add/Mul terms; Pow base; function arg;
                                      // Opaque args; Integral {lo,hi,integrand}; Antideriv {integrand}
    size_t hash = 0;
};

// ---- builders -------------------------------------------------------------

Expr make_const(const Rational& v);
Expr make_int(long long v);
Expr make_symbol(const std::string& name, SymKind k);
Expr make_jet(const std::string& field, const std::vector<std::string>& indeps,
              const std::vector<int>& orders);
Expr make_add(std::vector<Expr> terms);
Expr make_mul(std::vector<Expr> factors);
Expr make_pow(const Expr& base, const Rational& e);
Expr make_pow(const Expr& base, const Expr& e); // symbolic exponent -> exp(e*ln(base))
Expr make_fun(Kind k, const Expr& arg);         // Exp..Cosh
Expr make_opaque(const std::string& name, std::vector<Expr> args, std::vector<int> dorders = {});
Expr make_integral(const std::string& dummy, const Expr& lo, const Expr& hi, const Expr& integrand);
Expr make_antideriv(const Expr& integrand, const std::string& var);

inline Expr operator+(const Expr& a, const Expr& b) { return make_add({a, b}); }
inline Expr operator*(const Expr& a, const Expr& b) { return make_mul({a, b}); }
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator/(const Expr& a, const Expr& b);

bool is_zero_const(const Expr& e);
bool is_one_const(const Expr& e);
bool is_const(const Expr& e, const Rational& v);

/// Structural equality (pointer-identity fast path, then recursive).
bool expr_equal(const Expr& a, const Expr& b);
/// Deterministic total order used for canonical output.
int expr_cmp(const Expr& a, const Expr& b);

std::string to_string(const Expr& e);

/// Key for a jet coordinate, used in manifolds and substitution maps.
std::string jet_key(const Expr& jet);

// ---- declarations ---------------------------------------------------------

struct FieldDecl {
    std::string name;
    std::vector<std::string> indeps; // ordered independent variables
};

/// Per-case declaration table: which identifiers are independent variables,
/// parameters, dependent fields (including reduction functions), and opaque
/// functions. The parser resolves identifiers against it.
class SymbolTable {
  public:
    void add_independent(const std::string& n);
    void add_parameter(const std::string& n);
    void add_field(const std::string& n, const std::vector<std::string>& indeps);
    void add_opaque(const std::string& n, int arity);

    bool is_independent(const std::string& n) const;
    bool is_parameter(const std::string& n) const;
    bool is_field(const std::string& n) const;
    bool is_opaque(const std::string& n) const;
    int opaque_arity(const std::string& n) const;
    const FieldDecl* field(const std::string& n) const;
    const std::vector<std::string>& independents() const { return indep_order_; }

    bool known(const std::string& n) const {
        return is_independent(n) || is_parameter(n) || is_field(n) || is_opaque(n);
    }

    Expr sym(const std::string& n) const; // Symbol or zero-order Jet
    Expr jet(const std::string& field, const std::vector<int>& orders) const;

  private:
    std::map<std::string, SymKind> symbols_;
    std::map<std::string, FieldDecl> fields_;
    std::map<std::string, int> opaques_;
    std::vector<std::string> indep_order_;
};

} // namespace symred

#endif
