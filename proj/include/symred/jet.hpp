#ifndef SYMRED_JET_HPP
#define SYMRED_JET_HPP

#include "symred/diff.hpp"
#include "symred/expr.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace symred {

struct ManifoldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A set of solved-form rewrite rules (jet -> expression) closed under
/// total differentiation; reduces expressions to the manifold of all
/// differential consequences.
///
/// The lazily derived consequence cache is confined to the instance: share
/// results, not a live Manifold, across threads (the case runner builds one
/// per case).
class Manifold {
  public:
    Manifold() = default;

    /// Add a rule lhs = rhs. The lhs jet must have maximal order among the
    /// jets of its own field appearing in rhs, so substitution terminates.
    void add_rule(const Expr& lhs_jet, const Expr& rhs);

    const std::vector<std::pair<Expr, Expr>>& rules() const { return rules_; }
    bool empty() const { return rules_.empty(); }

    /// Rewrite until no rule (or differential consequence of one) applies,
    /// then normalize. Idempotent.
    Expr reduce(const Expr& e) const;

    /// The reduction of a single jet coordinate, derived lazily by total
    /// differentiation of the base rules and memoized.
    const Expr* lookup(const Expr& jet) const;

    /// Check that mixed differential consequences commute (x-then-t equals
    /// t-then-x for every rule). Throws ManifoldError on failure.
    void validate() const;

  private:
    std::vector<std::pair<Expr, Expr>> rules_;
    mutable std::map<std::string, Expr> derived_;
    mutable std::map<std::string, bool> in_progress_;
};

/// Total derivative D_var. Jets rise by one order in var; symbols of other
/// kinds differentiate to zero; fields not depending on var vanish. When a
/// manifold is given the result is reduced to it.
Expr total_derivative(const Expr& e, const std::string& var, const Manifold* m = nullptr);

/// Iterated total derivative D_x^a D_t^b ... following `orders` aligned
/// with `vars`.
Expr total_derivative_multi(const Expr& e, const std::vector<std::string>& vars,
                            const std::vector<int>& orders, const Manifold* m = nullptr);

Expr reduce_to_manifold(const Expr& e, const Manifold& m);

/// Evolutionary vector field eta * d/d(field).
struct GeneralizedField {
    std::string field;
    Expr characteristic;
};

/// Prolonged action X^(k) e restricted to the manifold:
/// sum over jets u_J of (de/du_J) * D_J eta, everything reduced.
Expr prolong_apply(const GeneralizedField& X, const Expr& e, const Manifold& m);

/// Evolutionary commutator [X1, X2]: characteristic X1^(inf) eta2 - X2^(inf) eta1.
GeneralizedField commutator(const GeneralizedField& X1, const GeneralizedField& X2,
                            const Manifold* m = nullptr);

/// Point field xi_t d_t + xi_x d_x + eta d_u in evolutionary form:
/// eta - xi_t u_t - xi_x u_x (coefficients may depend on the field itself).
Expr evolutionary_characteristic(const Expr& xi_t, const Expr& xi_x, const Expr& eta,
                                 const Expr& u_jet, const std::string& tvar,
                                 const std::string& xvar);

} // namespace symred

#endif
