#ifndef SYMRED_DIFF_HPP
#define SYMRED_DIFF_HPP

#include "symred/expr.hpp"

#include <map>

namespace symred {

/// Partial derivative with respect to an atom (Symbol or Jet). All other
/// atoms are treated as independent; integral atoms follow the Leibniz rule.
Expr diff(const Expr& e, const Expr& atom);

/// Substitution rules keyed by atom. Jets are matched exactly: a rule for
/// the bare field does not rewrite its derivatives.
class SubstMap {
  public:
    void add(const Expr& atom, const Expr& replacement);
    const Expr* find(const Expr& atom) const;
    bool empty() const { return rules_.empty(); }

  private:
    std::map<std::string, std::vector<std::pair<Expr, Expr>>> rules_;
};

/// Simultaneous substitution. The caller normalizes afterwards if needed.
Expr substitute_raw(const Expr& e, const SubstMap& rules);

/// Simultaneous substitution followed by normalization.
Expr substitute(const Expr& e, const SubstMap& rules);

/// Does `e` contain the given atom (structural match on Symbol/Jet/Opaque)?
bool contains_atom(const Expr& e, const Expr& atom);

/// Collect every jet of the named field occurring in `e`.
std::vector<Expr> collect_jets(const Expr& e, const std::string& field);

/// Collect free symbols and jets (for sampling); dummies excluded.
std::vector<Expr> collect_free_atoms(const Expr& e);

} // namespace symred

#endif
