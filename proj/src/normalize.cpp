#include "symred/normalize.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace symred {

namespace {

struct NormCtx {
    AtomTable* tab;
    int int_depth = 0;
};

RF norm(const Expr& e, NormCtx& ctx);

// ---- helpers for canonical reconstruction ----------------------------------

Expr atom_power_expr(const Expr& atom, const Rational& e) {
    if (e.is_one()) return atom;
    if (atom->kind == Kind::Exp) {
        // exp(m)^e prints as exp(e*m)
        return make_fun(Kind::Exp, make_mul({make_const(e), atom->kids[0]}));
    }
    return make_pow(atom, e);
}

Expr mono_to_expr(const Monomial& m, const Rational& coeff, const AtomTable& tab) {
    std::vector<Expr> factors;
    for (auto& [id, e] : m) factors.push_back(atom_power_expr(tab.expr_of(id), e));
    std::sort(factors.begin(), factors.end(),
              [](const Expr& a, const Expr& b) { return expr_cmp(a, b) < 0; });
    if (!coeff.is_one() || factors.empty()) factors.insert(factors.begin(), make_const(coeff));
    return make_mul(std::move(factors));
}

} // namespace

Expr poly_to_expr(const Poly& p, const AtomTable& tab) {
    if (p.empty()) return make_int(0);
    std::vector<Expr> terms;
    for (auto& [m, c] : p) terms.push_back(mono_to_expr(m, c, tab));
    std::sort(terms.begin(), terms.end(),
              [](const Expr& a, const Expr& b) { return expr_cmp(a, b) < 0; });
    return make_add(std::move(terms));
}

Expr rf_to_expr(const RF& r, const AtomTable& tab) {
    Expr num = poly_to_expr(r.num, tab);
    if (r.den.trivial()) return num;
    std::vector<Expr> dens;
    for (auto& [id, e] : r.den.mono) dens.push_back(atom_power_expr(tab.expr_of(id), -e));
    for (auto& [f, k] : r.den.factors)
        dens.push_back(make_pow(poly_to_expr(f, tab), Rational(-(long long)k)));
    std::sort(dens.begin(), dens.end(),
              [](const Expr& a, const Expr& b) { return expr_cmp(a, b) < 0; });
    dens.insert(dens.begin(), num);
    return make_mul(std::move(dens));
}

namespace {

// ---- rational powers --------------------------------------------------------

void prime_split(long long v, const Rational& e, Rational& coeff, std::vector<std::pair<long long, Rational>>& out) {
    // v > 0: v^e as integer-part coefficient times prime^frac atoms
    for (long long p = 2; p * p <= v; ++p) {
        int k = 0;
        while (v % p == 0) {
            v /= p;
            ++k;
        }
        if (k) {
            Rational tot = e * Rational(k);
            long long ip = tot.floor();
            Rational frac = tot - Rational(ip);
            coeff *= Rational(p).pow_int(ip);
            if (!frac.is_zero()) out.emplace_back(p, frac);
        }
    }
    if (v > 1) {
        long long ip = e.floor();
        Rational frac = e - Rational(ip);
        coeff *= Rational(v).pow_int(ip);
        if (!frac.is_zero()) out.emplace_back(v, frac);
    }
}

RF const_pow_rat(const Rational& c, const Rational& e, NormCtx& ctx) {
    if (c.is_zero()) return rf_const(Rational(0));
    if (e.is_integer()) return rf_const(c.pow_int(e.num()));
    if (c.is_negative()) {
        // outside the positive-radicand domain; keep an opaque power atom
        int id = ctx.tab->intern(make_pow(make_const(c), Rational(1)));
        (void)id;
        // represent as atom (c)^e directly
        Expr atom = make_const(c);
        return rf_atom(ctx.tab->intern(atom), e);
    }
    Rational coeff(1);
    std::vector<std::pair<long long, Rational>> primes;
    prime_split(c.num(), e, coeff, primes);
    prime_split(c.den(), -e, coeff, primes);
    RF r = rf_const(coeff);
    for (auto& [p, frac] : primes) {
        // registered as compound so accumulated exponents >= 1 fold back into
        // the rational coefficient, e.g. sqrt(3)^3 = 3*sqrt(3)
        int id = ctx.tab->intern_compound(make_const(Rational(p)), poly_const(Rational(p)));
        RF a = frac.is_negative() ? rf_pow_int(rf_atom(id, -frac), -1, *ctx.tab)
                                  : rf_atom(id, frac);
        r = rf_mul(r, a, *ctx.tab);
    }
    return r;
}

// atom^e where the atom is simple (not a sum)
RF simple_atom_pow(int id, const Rational& e, NormCtx& ctx) {
    if (e.is_negative()) return rf_pow_int(rf_atom(id, -e), -1, *ctx.tab);
    return rf_atom(id, e);
}

RF rf_pow_rational(const RF& base, const Rational& e, NormCtx& ctx);

// primitive polynomial (not constant, not monomial) raised to rational power
RF compound_pow(const Poly& prim, const Rational& e, NormCtx& ctx) {
    long long ip = e.floor();
    Rational frac = e - Rational(ip);
    RF r = rf_const(Rational(1));
    if (ip > 0) {
        r = rf_from_poly(poly_pow(prim, ip, *ctx.tab));
    } else if (ip < 0) {
        RF d;
        d.num = poly_const(Rational(1));
        d.den.factors.emplace_back(prim, (int)(-ip));
        r = d;
    }
    if (!frac.is_zero()) {
        Expr key = poly_to_expr(prim, *ctx.tab);
        int id = ctx.tab->intern_compound(key, prim);
        r = rf_mul(r, rf_atom(id, frac), *ctx.tab);
    }
    return r;
}

RF poly_pow_rational(const Poly& p, const Rational& e, NormCtx& ctx) {
    if (poly_is_const(p)) return const_pow_rat(poly_const_value(p), e, ctx);
    // split content, common monomial, and primitive part
    Rational c = poly_content_abs(p);
    Poly q = poly_scale(p, Rational(1) / c);
    Monomial common = poly_common_monomial(q);
    q = poly_shift_down(q, common);
    RF r = const_pow_rat(c, e, ctx);
    for (auto& [id, k] : common) {
        Rational tot = k * e;
        if (ctx.tab->is_compound(id)) {
            RF part = compound_pow(ctx.tab->base_poly(id), tot, ctx);
            r = rf_mul(r, part, *ctx.tab);
        } else {
            r = rf_mul(r, simple_atom_pow(id, tot, ctx), *ctx.tab);
        }
    }
    if (poly_is_const(q)) {
        r = rf_mul(r, const_pow_rat(poly_const_value(q), e, ctx), *ctx.tab);
        return r;
    }
    if (q.size() == 1) {
        // single monomial left (coefficient may be negative)
        auto& [m, cc] = *q.begin();
        r = rf_mul(r, const_pow_rat(cc, e, ctx), *ctx.tab);
        for (auto& [id, k] : m) {
            if (ctx.tab->is_compound(id))
                r = rf_mul(r, compound_pow(ctx.tab->base_poly(id), k * e, ctx), *ctx.tab);
            else
                r = rf_mul(r, simple_atom_pow(id, k * e, ctx), *ctx.tab);
        }
        return r;
    }
    return rf_mul(r, compound_pow(q, e, ctx), *ctx.tab);
}

RF rf_pow_rational(const RF& base, const Rational& e, NormCtx& ctx) {
    if (e.is_integer()) return rf_pow_int(base, e.num(), *ctx.tab);
    RF r = poly_pow_rational(base.num, e, ctx);
    if (!base.den.trivial()) {
        // den^(-e)
        RF d = rf_const(Rational(1));
        for (auto& [id, k] : base.den.mono) {
            if (ctx.tab->is_compound(id))
                d = rf_mul(d, compound_pow(ctx.tab->base_poly(id), k * (-e), ctx), *ctx.tab);
            else
                d = rf_mul(d, simple_atom_pow(id, k * (-e), ctx), *ctx.tab);
        }
        for (auto& [f, k] : base.den.factors)
            d = rf_mul(d, poly_pow_rational(f, Rational(-(long long)k) * e, ctx), *ctx.tab);
        r = rf_mul(r, d, *ctx.tab);
    }
    return r;
}

// ---- exp / ln / trig ---------------------------------------------------------

RF norm_exp(const Expr& arg, NormCtx& ctx) {
    RF ra = norm(arg, ctx);
    if (ra.num.empty()) return rf_const(Rational(1));
    AtomTable& tab = *ctx.tab;
    auto exp_of_monomial = [&](const Monomial& m, const Rational& c) -> RF {
        if (m.empty()) {
            // exp of a rational constant
            int id = tab.intern(make_fun(Kind::Exp, make_int(1)));
            return simple_atom_pow(id, c, ctx);
        }
        if (m.size() == 1 && m[0].second.is_one()) {
            const Expr& a = tab.expr_of(m[0].first);
            if (a->kind == Kind::Ln) {
                // exp(c*ln y) = y^c
                RF y = norm(a->kids[0], ctx);
                return rf_pow_rational(y, c, ctx);
            }
        }
        Expr key = make_fun(Kind::Exp, mono_to_expr(m, Rational(1), tab));
        return simple_atom_pow(tab.intern(key), c, ctx);
    };
    if (ra.den.trivial()) {
        RF r = rf_const(Rational(1));
        for (auto& [m, c] : ra.num) r = rf_mul(r, exp_of_monomial(m, c), tab);
        return r;
    }
    // general ratio: one atom for the primitive part
    Rational c = poly_content_canonical(ra.num, tab);
    RF prim{poly_scale(ra.num, Rational(1) / c), ra.den};
    Expr key = make_fun(Kind::Exp, rf_to_expr(prim, tab));
    return simple_atom_pow(tab.intern(key), c, ctx);
}

RF norm_ln(const Expr& arg, NormCtx& ctx) {
    RF ra = norm(arg, ctx);
    Expr ea = rf_to_expr(ra, *ctx.tab);
    if (ea->kind == Kind::Const) {
        if (ea->value.is_one()) return rf_const(Rational(0));
        return rf_atom(ctx.tab->intern(make_fun(Kind::Ln, ea)));
    }
    if (ea->kind == Kind::Pow) {
        // ln(b^r) = r*ln b on positive domains
        RF inner = norm_ln(ea->kids[0], ctx);
        return rf_mul(rf_const(ea->value), inner, *ctx.tab);
    }
    if (ea->kind == Kind::Exp) return norm(ea->kids[0], ctx);
    return rf_atom(ctx.tab->intern(make_fun(Kind::Ln, ea)));
}

RF norm_trig(Kind k, const Expr& arg, NormCtx& ctx) {
    RF ra = norm(arg, ctx);
    if (ra.num.empty()) {
        // sin(0)=sinh(0)=0, cos(0)=cosh(0)=1
        return (k == Kind::Sin || k == Kind::Sinh) ? rf_const(Rational(0))
                                                   : rf_const(Rational(1));
    }
    bool flip = poly_canonical_sign(ra.num, *ctx.tab) < 0;
    if (flip) ra = rf_neg(ra);
    Expr key = make_fun(k, rf_to_expr(ra, *ctx.tab));
    RF r = rf_atom(ctx.tab->intern(key));
    bool odd = (k == Kind::Sin || k == Kind::Sinh);
    if (flip && odd) r = rf_neg(r);
    return r;
}

// ---- main dispatch -----------------------------------------------------------

bool expr_mentions_symbol(const Expr& x, const std::string& name) {
    if (x->kind == Kind::Symbol && x->name == name) return true;
    for (auto& k : x->kids)
        if (expr_mentions_symbol(k, name)) return true;
    return false;
}

Expr rename_dummy(const Expr& x, const std::string& from, const std::string& to) {
    if (x->kind == Kind::Symbol)
        return (x->name == from && x->sk == SymKind::Dummy) ? make_symbol(to, SymKind::Dummy) : x;
    if (x->kids.empty()) return x;
    std::vector<Expr> kids;
    kids.reserve(x->kids.size());
    for (auto& k : x->kids) kids.push_back(rename_dummy(k, from, to));
    switch (x->kind) {
        case Kind::Add: return make_add(std::move(kids));
        case Kind::Mul: return make_mul(std::move(kids));
        case Kind::Pow: return make_pow(kids[0], x->value);
        case Kind::Exp:
        case Kind::Ln:
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Sinh:
        case Kind::Cosh: return make_fun(x->kind, kids[0]);
        case Kind::Opaque: return make_opaque(x->name, std::move(kids), x->dorders);
        case Kind::Integral:
            // an inner integral shadowing `from` keeps its body; bounds are outside the scope
            if (x->name == from)
                return make_integral(x->name, kids[0], kids[1], x->kids[2]);
            return make_integral(x->name, kids[0], kids[1], kids[2]);
        case Kind::Antideriv: return make_antideriv(kids[0], x->name);
        default: return x;
    }
}

RF norm(const Expr& e, NormCtx& ctx) {
    AtomTable& tab = *ctx.tab;
    switch (e->kind) {
        case Kind::Const:
            return rf_const(e->value);
        case Kind::Symbol:
        case Kind::Jet:
            return rf_atom(tab.intern(e));
        case Kind::Add: {
            // bucket terms by denominator before combining: folding large
            // like-denominator sums pairwise through rf_add is quadratic
            std::vector<RF> groups;
            for (auto& k : e->kids) {
                RF rk = norm(k, ctx);
                if (rk.num.empty()) continue;
                bool merged = false;
                for (auto& g : groups) {
                    if (rf_same_den(g.den, rk.den)) {
                        for (auto& [mm, cc] : rk.num) poly_add_term(g.num, mm, cc);
                        merged = true;
                        break;
                    }
                }
                if (!merged) groups.push_back(std::move(rk));
            }
            RF r = rf_const(Rational(0));
            for (auto& g : groups) {
                rf_collapse(g, tab);
                r = rf_add(r, g, tab);
            }
            return r;
        }
        case Kind::Mul: {
            RF r = rf_const(Rational(1));
            for (auto& k : e->kids) {
                r = rf_mul(r, norm(k, ctx), tab);
                if (r.num.empty()) return r;
            }
            return r;
        }
        case Kind::Pow:
            return rf_pow_rational(norm(e->kids[0], ctx), e->value, ctx);
        case Kind::Exp:
            return norm_exp(e->kids[0], ctx);
        case Kind::Ln:
            return norm_ln(e->kids[0], ctx);
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Sinh:
        case Kind::Cosh:
            return norm_trig(e->kind, e->kids[0], ctx);
        case Kind::Opaque: {
            std::vector<Expr> args;
            for (auto& a : e->kids) args.push_back(rf_to_expr(norm(a, ctx), tab));
            return rf_atom(tab.intern(make_opaque(e->name, std::move(args), e->dorders)));
        }
        case Kind::Integral: {
            Expr lo = rf_to_expr(norm(e->kids[0], ctx), tab);
            Expr hi = rf_to_expr(norm(e->kids[1], ctx), tab);
            // canonical dummy rename so atoms compare modulo the dummy's name
            ++ctx.int_depth;
            std::string canon_name =
                ctx.int_depth == 1 ? "s" : ("s" + std::to_string(ctx.int_depth));
            Expr integrand = e->kids[2];
            std::string dn = e->name;
            if (e->name != canon_name && !expr_mentions_symbol(integrand, canon_name)) {
                integrand = rename_dummy(integrand, e->name, canon_name);
                dn = canon_name;
            }
            Expr ni = rf_to_expr(norm(integrand, ctx), tab);
            --ctx.int_depth;
            if (is_zero_const(ni) || expr_equal(lo, hi)) return rf_const(Rational(0));
            return rf_atom(tab.intern(make_integral(dn, lo, hi, ni)));
        }
        case Kind::Antideriv: {
            Expr ni = rf_to_expr(norm(e->kids[0], ctx), tab);
            if (is_zero_const(ni)) return rf_const(Rational(0));
            return rf_atom(tab.intern(make_antideriv(ni, e->name)));
        }
    }
    throw std::logic_error("unreachable expression kind");
}

} // namespace

RF normalize_rf(const Expr& e, AtomTable& tab) {
    NormCtx ctx{&tab};
    return norm(e, ctx);
}

Expr normalize(const Expr& e) {
    try {
        AtomTable tab;
        RF r = normalize_rf(e, tab);
        return rf_to_expr(r, tab);
    } catch (const RationalOverflow&) {
        return e;
    }
}

ZeroTest is_zero_symbolic(const Expr& e) {
    try {
        AtomTable tab;
        RF r = normalize_rf(e, tab);
        return r.num.empty() ? ZeroTest::Zero : ZeroTest::NonZero;
    } catch (const RationalOverflow&) {
        return ZeroTest::Inconclusive;
    }
}

bool equal_normalized(const Expr& a, const Expr& b) {
    return is_zero_symbolic(a - b) == ZeroTest::Zero;
}

std::optional<std::vector<std::pair<Rational, Expr>>> collect_coefficients(const Expr& e,
                                                                           const Expr& w) {
    try {
        AtomTable tab;
        RF rw = normalize_rf(w, tab);
        if (rw.num.size() != 1 || !rw.den.trivial()) return std::nullopt;
        const Monomial& mw = rw.num.begin()->first;
        if (mw.size() != 1 || !rw.num.begin()->second.is_one()) return std::nullopt;
        int wid = mw[0].first;
        Rational wexp = mw[0].second;

        RF re = normalize_rf(e, tab);
        for (auto& [id, k] : re.den.mono)
            if (id == wid) return std::nullopt;
        for (auto& [f, k] : re.den.factors)
            for (auto& [m, c] : f)
                for (auto& [id, ex] : m)
                    if (id == wid) return std::nullopt;

        std::map<Rational, Poly, std::less<Rational>> groups;
        for (auto& [m, c] : re.num) {
            Rational p(0);
            Monomial rest;
            for (auto& [id, ex] : m) {
                if (id == wid)
                    p = ex / wexp;
                else
                    rest.emplace_back(id, ex);
            }
            poly_add_term(groups[p], rest, c);
        }
        std::vector<std::pair<Rational, Expr>> out;
        for (auto& [p, poly] : groups) {
            if (poly.empty()) continue;
            RF coeff{poly, re.den};
            out.emplace_back(p, rf_to_expr(coeff, tab));
        }
        return out;
    } catch (const RationalOverflow&) {
        return std::nullopt;
    }
}

std::optional<std::pair<std::vector<Expr>, Expr>> split_affine(const Expr& e,
                                                               const std::vector<Expr>& atoms) {
    try {
        AtomTable tab;
        std::vector<int> ids;
        for (auto& a : atoms) {
            RF ra = normalize_rf(a, tab);
            if (ra.num.size() != 1 || !ra.den.trivial()) return std::nullopt;
            const auto& [m, c] = *ra.num.begin();
            if (m.size() != 1 || !c.is_one() || !m[0].second.is_one()) return std::nullopt;
            ids.push_back(m[0].first);
        }
        RF re = normalize_rf(e, tab);
        // denominator must be free of the atoms
        for (int id : ids) {
            for (auto& [aid, k] : re.den.mono)
                if (aid == id) return std::nullopt;
            for (auto& [f, k] : re.den.factors)
                for (auto& [m, c] : f)
                    for (auto& [aid, ex] : m)
                        if (aid == id) return std::nullopt;
        }
        std::vector<Poly> coeffs(ids.size());
        Poly rest;
        for (auto& [m, c] : re.num) {
            int found = -1;
            Monomial reduced;
            for (auto& [aid, ex] : m) {
                auto it = std::find(ids.begin(), ids.end(), aid);
                if (it != ids.end()) {
                    if (found >= 0 || !ex.is_one()) return std::nullopt; // not affine
                    found = (int)(it - ids.begin());
                } else {
                    reduced.emplace_back(aid, ex);
                }
            }
            if (found >= 0)
                poly_add_term(coeffs[found], reduced, c);
            else
                poly_add_term(rest, m, c);
        }
        std::vector<Expr> out;
        for (auto& p : coeffs) out.push_back(rf_to_expr(RF{p, re.den}, tab));
        Expr r = rf_to_expr(RF{rest, re.den}, tab);
        return std::make_pair(out, r);
    } catch (const RationalOverflow&) {
        return std::nullopt;
    }
}

} // namespace symred
