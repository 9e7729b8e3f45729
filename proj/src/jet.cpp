#include "symred/jet.hpp"

#include "symred/normalize.hpp"

#include <cassert>
#include <functional>

namespace symred {

namespace {

// plain total derivative, no manifold reduction
Expr td(const Expr& e, const std::string& var) {
    switch (e->kind) {
        case Kind::Const:
            return make_int(0);
        case Kind::Symbol:
            return (e->sk == SymKind::Independent && e->name == var) ? make_int(1) : make_int(0);
        case Kind::Jet: {
            for (size_t i = 0; i < e->indeps.size(); ++i) {
                if (e->indeps[i] == var) {
                    std::vector<int> orders = e->orders;
                    ++orders[i];
                    return make_jet(e->name, e->indeps, orders);
                }
            }
            return make_int(0); // field does not depend on var
        }
        case Kind::Add: {
            std::vector<Expr> terms;
            for (auto& k : e->kids) terms.push_back(td(k, var));
            return make_add(std::move(terms));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr d = td(e->kids[i], var);
                if (is_zero_const(d)) continue;
                std::vector<Expr> fac;
                for (size_t j = 0; j < e->kids.size(); ++j) fac.push_back(i == j ? d : e->kids[j]);
                terms.push_back(make_mul(std::move(fac)));
            }
            return make_add(std::move(terms));
        }
        case Kind::Pow: {
            Expr d = td(e->kids[0], var);
            if (is_zero_const(d)) return d;
            return make_mul(
                {make_const(e->value), make_pow(e->kids[0], e->value - Rational(1)), d});
        }
        case Kind::Exp: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d : make_mul({e, d});
        }
        case Kind::Ln: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d : d / e->kids[0];
        }
        case Kind::Sin: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d : make_mul({make_fun(Kind::Cos, e->kids[0]), d});
        }
        case Kind::Cos: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d
                                    : make_mul({make_int(-1), make_fun(Kind::Sin, e->kids[0]), d});
        }
        case Kind::Sinh: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d : make_mul({make_fun(Kind::Cosh, e->kids[0]), d});
        }
        case Kind::Cosh: {
            Expr d = td(e->kids[0], var);
            return is_zero_const(d) ? d : make_mul({make_fun(Kind::Sinh, e->kids[0]), d});
        }
        case Kind::Opaque: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr d = td(e->kids[i], var);
                if (is_zero_const(d)) continue;
                std::vector<int> dord = e->dorders;
                ++dord[i];
                terms.push_back(make_mul({make_opaque(e->name, e->kids, std::move(dord)), d}));
            }
            return make_add(std::move(terms));
        }
        case Kind::Integral: {
            const Expr& lo = e->kids[0];
            const Expr& hi = e->kids[1];
            const Expr& f = e->kids[2];
            std::vector<Expr> terms;
            Expr dhi = td(hi, var);
            if (!is_zero_const(dhi)) {
                SubstMap at_hi;
                at_hi.add(make_symbol(e->name, SymKind::Dummy), hi);
                terms.push_back(make_mul({substitute_raw(f, at_hi), dhi}));
            }
            Expr dlo = td(lo, var);
            if (!is_zero_const(dlo)) {
                SubstMap at_lo;
                at_lo.add(make_symbol(e->name, SymKind::Dummy), lo);
                terms.push_back(make_mul({make_int(-1), substitute_raw(f, at_lo), dlo}));
            }
            Expr df = td(f, var);
            if (!is_zero_const(df)) terms.push_back(make_integral(e->name, lo, hi, df));
            return make_add(std::move(terms));
        }
        case Kind::Antideriv: {
            if (e->name == var) return e->kids[0];
            Expr df = td(e->kids[0], var);
            return is_zero_const(df) ? df : make_antideriv(df, e->name);
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace

// ---- Manifold ----------------------------------------------------------------

void Manifold::add_rule(const Expr& lhs_jet, const Expr& rhs) {
    if (lhs_jet->kind != Kind::Jet) throw ManifoldError("manifold rule lhs must be a jet");
    int lhs_total = 0;
    for (int o : lhs_jet->orders) lhs_total += o;
    if (lhs_total == 0) throw ManifoldError("manifold rule lhs must have positive order");
    // solved form: the rhs may not contain the lhs jet or any consequence of it
    for (auto& j : collect_jets(rhs, lhs_jet->name)) {
        bool dominates = j->indeps == lhs_jet->indeps;
        if (dominates)
            for (size_t i = 0; i < j->orders.size(); ++i)
                if (j->orders[i] < lhs_jet->orders[i]) dominates = false;
        if (dominates)
            throw ManifoldError("rule for " + to_string(lhs_jet) +
                                " is not in solved form: rhs contains " + to_string(j));
    }
    for (auto& [l, r] : rules_)
        if (expr_equal(l, lhs_jet)) throw ManifoldError("duplicate rule for " + to_string(lhs_jet));
    rules_.emplace_back(lhs_jet, rhs);
    derived_.clear();
}

const Expr* Manifold::lookup(const Expr& jet) const {
    if (jet->kind != Kind::Jet) return nullptr;
    std::string key = jet_key(jet);
    auto it = derived_.find(key);
    if (it != derived_.end()) return &it->second;

    // most specific rule whose lhs divides this jet
    const std::pair<Expr, Expr>* best = nullptr;
    int best_total = -1;
    for (auto& rule : rules_) {
        const Expr& lhs = rule.first;
        if (lhs->name != jet->name || lhs->indeps != jet->indeps) continue;
        bool leq = true;
        int total = 0;
        for (size_t i = 0; i < lhs->orders.size(); ++i) {
            if (lhs->orders[i] > jet->orders[i]) leq = false;
            total += lhs->orders[i];
        }
        if (leq && total > best_total) {
            best = &rule;
            best_total = total;
        }
    }
    if (!best) return nullptr;

    if (in_progress_.count(key))
        throw ManifoldError("cyclic manifold reduction at " + to_string(jet));
    in_progress_[key] = true;

    Expr value;
    try {
        if (expr_equal(best->first, jet)) {
            value = reduce(best->second);
        } else {
            // lower the jet by one order in a direction with surplus
            size_t dir = 0;
            for (size_t i = 0; i < jet->orders.size(); ++i)
                if (jet->orders[i] > best->first->orders[i]) dir = i;
            std::vector<int> lower = jet->orders;
            --lower[dir];
            const Expr* prev = lookup(make_jet(jet->name, jet->indeps, lower));
            assert(prev);
            value = reduce(td(*prev, jet->indeps[dir]));
        }
    } catch (...) {
        in_progress_.erase(key);
        throw;
    }
    in_progress_.erase(key);
    auto pos = derived_.emplace(key, value).first;
    return &pos->second;
}

namespace {

Expr rewrite_jets(const Expr& e, const Manifold& m, bool& changed) {
    if (e->kind == Kind::Jet) {
        if (const Expr* r = m.lookup(e)) {
            changed = true;
            return *r;
        }
        return e;
    }
    if (e->kids.empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(e->kids.size());
    for (auto& k : e->kids) kids.push_back(rewrite_jets(k, m, changed));
    switch (e->kind) {
        case Kind::Add: return make_add(std::move(kids));
        case Kind::Mul: return make_mul(std::move(kids));
        case Kind::Pow: return make_pow(kids[0], e->value);
        case Kind::Exp:
        case Kind::Ln:
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Sinh:
        case Kind::Cosh: return make_fun(e->kind, kids[0]);
        case Kind::Opaque: return make_opaque(e->name, std::move(kids), e->dorders);
        case Kind::Integral: return make_integral(e->name, kids[0], kids[1], kids[2]);
        case Kind::Antideriv: return make_antideriv(kids[0], e->name);
        default: return e;
    }
}

} // namespace

Expr Manifold::reduce(const Expr& e) const {
    if (rules_.empty()) return normalize(e);
    Expr cur = e;
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        cur = rewrite_jets(cur, *this, changed);
        if (!changed) return normalize(cur);
    }
    throw ManifoldError("manifold reduction did not terminate");
}

void Manifold::validate() const {
    for (auto& [lhs, rhs] : rules_) {
        for (size_t i = 0; i < lhs->indeps.size(); ++i) {
            for (size_t j = i + 1; j < lhs->indeps.size(); ++j) {
                Expr d1 = reduce(td(reduce(td(rhs, lhs->indeps[i])), lhs->indeps[j]));
                Expr d2 = reduce(td(reduce(td(rhs, lhs->indeps[j])), lhs->indeps[i]));
                if (is_zero_symbolic(d1 - d2) == ZeroTest::NonZero)
                    throw ManifoldError("mixed consequences of " + to_string(lhs) +
                                        " do not commute");
            }
        }
    }
}

// ---- derivatives and prolongation ---------------------------------------------

Expr total_derivative(const Expr& e, const std::string& var, const Manifold* m) {
    if (!m || m->empty()) return td(e, var);
    return m->reduce(td(m->reduce(e), var));
}

Expr total_derivative_multi(const Expr& e, const std::vector<std::string>& vars,
                            const std::vector<int>& orders, const Manifold* m) {
    assert(vars.size() == orders.size());
    Expr cur = e;
    for (size_t i = 0; i < vars.size(); ++i)
        for (int k = 0; k < orders[i]; ++k) cur = total_derivative(cur, vars[i], m);
    return cur;
}

Expr reduce_to_manifold(const Expr& e, const Manifold& m) { return m.reduce(e); }

Expr prolong_apply(const GeneralizedField& X, const Expr& e, const Manifold& m) {
    std::vector<Expr> jets = collect_jets(e, X.field);
    // D_J eta derived one order at a time and cached along the way
    std::map<std::vector<int>, Expr> dcache;
    std::function<Expr(const std::vector<std::string>&, const std::vector<int>&)> deta =
        [&](const std::vector<std::string>& indeps, const std::vector<int>& orders) -> Expr {
        auto it = dcache.find(orders);
        if (it != dcache.end()) return it->second;
        int total = 0;
        for (int o : orders) total += o;
        Expr val;
        if (total == 0) {
            val = m.reduce(X.characteristic);
        } else {
            size_t dir = 0;
            for (size_t i = 0; i < orders.size(); ++i)
                if (orders[i] > 0) dir = i;
            std::vector<int> lower = orders;
            --lower[dir];
            val = total_derivative(deta(indeps, lower), indeps[dir], &m);
        }
        dcache.emplace(orders, val);
        return val;
    };

    std::vector<Expr> terms;
    for (auto& jet : jets) {
        Expr coeff = diff(e, jet);
        if (is_zero_const(coeff)) continue;
        terms.push_back(make_mul({coeff, deta(jet->indeps, jet->orders)}));
    }
    return m.reduce(make_add(std::move(terms)));
}

GeneralizedField commutator(const GeneralizedField& X1, const GeneralizedField& X2,
                            const Manifold* m) {
    if (X1.field != X2.field)
        throw std::invalid_argument("commutator requires fields acting on the same dependent");
    Manifold none;
    const Manifold& mm = m ? *m : none;
    Expr a = prolong_apply(X1, X2.characteristic, mm);
    Expr b = prolong_apply(X2, X1.characteristic, mm);
    return GeneralizedField{X1.field, normalize(a - b)};
}

Expr evolutionary_characteristic(const Expr& xi_t, const Expr& xi_x, const Expr& eta,
                                 const Expr& u_jet, const std::string& tvar,
                                 const std::string& xvar) {
    assert(u_jet->kind == Kind::Jet);
    std::vector<int> ot(u_jet->orders.size(), 0), ox(u_jet->orders.size(), 0);
    for (size_t i = 0; i < u_jet->indeps.size(); ++i) {
        if (u_jet->indeps[i] == tvar) ot[i] = 1;
        if (u_jet->indeps[i] == xvar) ox[i] = 1;
    }
    Expr u_t = make_jet(u_jet->name, u_jet->indeps, ot);
    Expr u_x = make_jet(u_jet->name, u_jet->indeps, ox);
    return eta - make_mul({xi_t, u_t}) - make_mul({xi_x, u_x});
}

} // namespace symred
