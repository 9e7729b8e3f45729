#include "symred/diff.hpp"

#include "symred/normalize.hpp"

#include <cassert>
#include <set>

namespace symred {

namespace {

std::string atom_key(const Expr& a) {
    switch (a->kind) {
        case Kind::Symbol: return "s:" + a->name;
        case Kind::Jet: return "j:" + jet_key(a);
        case Kind::Opaque: return "o:" + a->name;
        default: return "x:" + to_string(a);
    }
}

} // namespace

void SubstMap::add(const Expr& atom, const Expr& replacement) {
    rules_[atom_key(atom)].emplace_back(atom, replacement);
}

const Expr* SubstMap::find(const Expr& atom) const {
    auto it = rules_.find(atom_key(atom));
    if (it == rules_.end()) return nullptr;
    for (auto& [a, r] : it->second)
        if (expr_equal(a, atom)) return &r;
    return nullptr;
}

Expr diff(const Expr& e, const Expr& atom) {
    assert(atom->kind == Kind::Symbol || atom->kind == Kind::Jet);
    switch (e->kind) {
        case Kind::Const:
            return make_int(0);
        case Kind::Symbol:
        case Kind::Jet:
            return expr_equal(e, atom) ? make_int(1) : make_int(0);
        case Kind::Add: {
            std::vector<Expr> terms;
            for (auto& k : e->kids) terms.push_back(diff(k, atom));
            return make_add(std::move(terms));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr d = diff(e->kids[i], atom);
                if (is_zero_const(d)) continue;
                std::vector<Expr> fac;
                for (size_t j = 0; j < e->kids.size(); ++j) fac.push_back(i == j ? d : e->kids[j]);
                terms.push_back(make_mul(std::move(fac)));
            }
            return make_add(std::move(terms));
        }
        case Kind::Pow: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul(
                {make_const(e->value), make_pow(e->kids[0], e->value - Rational(1)), d});
        }
        case Kind::Exp: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul({e, d});
        }
        case Kind::Ln: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return d / e->kids[0];
        }
        case Kind::Sin: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul({make_fun(Kind::Cos, e->kids[0]), d});
        }
        case Kind::Cos: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul({make_int(-1), make_fun(Kind::Sin, e->kids[0]), d});
        }
        case Kind::Sinh: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul({make_fun(Kind::Cosh, e->kids[0]), d});
        }
        case Kind::Cosh: {
            Expr d = diff(e->kids[0], atom);
            if (is_zero_const(d)) return d;
            return make_mul({make_fun(Kind::Sinh, e->kids[0]), d});
        }
        case Kind::Opaque: {
            // chain rule with formal partials
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr d = diff(e->kids[i], atom);
                if (is_zero_const(d)) continue;
                std::vector<int> dord = e->dorders;
                ++dord[i];
                terms.push_back(
                    make_mul({make_opaque(e->name, e->kids, std::move(dord)), d}));
            }
            return make_add(std::move(terms));
        }
        case Kind::Integral: {
            // Leibniz: boundary terms plus the integral of the differentiated
            // integrand (the dummy variable is scoped, never the target)
            assert(!(atom->kind == Kind::Symbol && atom->name == e->name));
            const Expr& lo = e->kids[0];
            const Expr& hi = e->kids[1];
            const Expr& f = e->kids[2];
            std::vector<Expr> terms;
            Expr dhi = diff(hi, atom);
            if (!is_zero_const(dhi)) {
                SubstMap at_hi;
                at_hi.add(make_symbol(e->name, SymKind::Dummy), hi);
                terms.push_back(make_mul({substitute_raw(f, at_hi), dhi}));
            }
            Expr dlo = diff(lo, atom);
            if (!is_zero_const(dlo)) {
                SubstMap at_lo;
                at_lo.add(make_symbol(e->name, SymKind::Dummy), lo);
                terms.push_back(make_mul({make_int(-1), substitute_raw(f, at_lo), dlo}));
            }
            Expr df = diff(f, atom);
            if (!is_zero_const(df)) terms.push_back(make_integral(e->name, lo, hi, df));
            return make_add(std::move(terms));
        }
        case Kind::Antideriv: {
            // d/dv Anti(f, v) = f; otherwise differentiate under the integral
            if (atom->kind == Kind::Symbol && atom->name == e->name) return e->kids[0];
            Expr df = diff(e->kids[0], atom);
            if (is_zero_const(df)) return df;
            return make_antideriv(df, e->name);
        }
    }
    throw std::logic_error("unreachable");
}

Expr substitute_raw(const Expr& e, const SubstMap& rules) {
    switch (e->kind) {
        case Kind::Const:
            return e;
        case Kind::Symbol:
        case Kind::Jet: {
            const Expr* r = rules.find(e);
            return r ? *r : e;
        }
        case Kind::Opaque: {
            if (const Expr* r = rules.find(e)) return *r;
            std::vector<Expr> kids;
            for (auto& k : e->kids) kids.push_back(substitute_raw(k, rules));
            return make_opaque(e->name, std::move(kids), e->dorders);
        }
        default: {
            std::vector<Expr> kids;
            kids.reserve(e->kids.size());
            for (auto& k : e->kids) kids.push_back(substitute_raw(k, rules));
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
                case Kind::Integral: return make_integral(e->name, kids[0], kids[1], kids[2]);
                case Kind::Antideriv: return make_antideriv(kids[0], e->name);
                default: return e;
            }
        }
    }
}

Expr substitute(const Expr& e, const SubstMap& rules) {
    return normalize(substitute_raw(e, rules));
}

bool contains_atom(const Expr& e, const Expr& atom) {
    if ((e->kind == Kind::Symbol || e->kind == Kind::Jet) && expr_equal(e, atom)) return true;
    if (e->kind == atom->kind && expr_equal(e, atom)) return true;
    for (auto& k : e->kids)
        if (contains_atom(k, atom)) return true;
    return false;
}

namespace {

void walk_atoms(const Expr& e, std::set<std::string>& seen, std::vector<Expr>& out,
                std::set<std::string>& dummies) {
    if (e->kind == Kind::Symbol) {
        if (e->sk == SymKind::Dummy && dummies.count(e->name)) return;
        std::string k = to_string(e);
        if (seen.insert(k).second) out.push_back(e);
        return;
    }
    if (e->kind == Kind::Jet) {
        std::string k = jet_key(e);
        if (seen.insert(k).second) out.push_back(e);
        return;
    }
    if (e->kind == Kind::Integral) {
        walk_atoms(e->kids[0], seen, out, dummies);
        walk_atoms(e->kids[1], seen, out, dummies);
        bool added = dummies.insert(e->name).second;
        walk_atoms(e->kids[2], seen, out, dummies);
        if (added) dummies.erase(e->name);
        return;
    }
    for (auto& k : e->kids) walk_atoms(k, seen, out, dummies);
}

} // namespace

std::vector<Expr> collect_jets(const Expr& e, const std::string& field) {
    std::vector<Expr> all = collect_free_atoms(e);
    std::vector<Expr> out;
    for (auto& a : all)
        if (a->kind == Kind::Jet && a->name == field) out.push_back(a);
    return out;
}

std::vector<Expr> collect_free_atoms(const Expr& e) {
    std::set<std::string> seen, dummies;
    std::vector<Expr> out;
    walk_atoms(e, seen, out, dummies);
    return out;
}

} // namespace symred
