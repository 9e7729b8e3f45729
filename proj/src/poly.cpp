#include "symred/poly.hpp"

#include <algorithm>
#include <cassert>

namespace symred {

// ---- monomial helpers -------------------------------------------------------

namespace {

Rational mono_degree(const Monomial& m) {
    Rational d(0);
    for (auto& [id, e] : m) d += e;
    return d;
}

} // namespace

bool MonoLess::operator()(const Monomial& a, const Monomial& b) const {
    Rational da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da < db;
    // lex on (id asc, exp desc)
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first != b[j].first) return a[i].first > b[j].first;
        if (a[i].second != b[j].second) return a[i].second < b[j].second;
        ++i;
        ++j;
    }
    return a.size() < b.size();
}

int AtomTable::intern(const Expr& canon) {
    auto it = index_.find(canon->hash);
    if (it != index_.end())
        for (int id : it->second)
            if (expr_equal(atoms_[id].canon, canon)) return id;
    int id = (int)atoms_.size();
    atoms_.push_back({canon, to_string(canon), {}, false});
    index_[canon->hash].push_back(id);
    return id;
}

int AtomTable::intern_compound(const Expr& canon, const Poly& base) {
    auto it = index_.find(canon->hash);
    if (it != index_.end())
        for (int id : it->second)
            if (expr_equal(atoms_[id].canon, canon)) return id;
    int id = (int)atoms_.size();
    atoms_.push_back({canon, to_string(canon), base, true});
    index_[canon->hash].push_back(id);
    return id;
}

// ---- polynomial basics -------------------------------------------------------

Poly poly_zero() { return {}; }

Poly poly_const(const Rational& c) {
    Poly p;
    if (!c.is_zero()) p[Monomial{}] = c;
    return p;
}

Poly poly_atom(int id, const Rational& exp) {
    Poly p;
    if (exp.is_zero())
        p[Monomial{}] = Rational(1);
    else
        p[Monomial{{id, exp}}] = Rational(1);
    return p;
}

bool poly_is_zero(const Poly& p) { return p.empty(); }
bool poly_is_const(const Poly& p) {
    return p.empty() || (p.size() == 1 && p.begin()->first.empty());
}
Rational poly_const_value(const Poly& p) {
    if (p.empty()) return Rational(0);
    assert(poly_is_const(p));
    return p.begin()->second;
}

void poly_add_term(Poly& p, const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    }
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b) poly_add_term(r, m, c);
    return r;
}

Poly poly_neg(const Poly& a) {
    Poly r;
    for (auto& [m, c] : a) r.emplace(m, -c);
    return r;
}

Poly poly_scale(const Poly& a, const Rational& c) {
    if (c.is_zero()) return {};
    Poly r;
    for (auto& [m, v] : a) r.emplace(m, v * c);
    return r;
}

namespace {

// Multiply two monomials. Integer parts of compound-atom exponents are
// expanded through the base polynomial; the result is in general a
// polynomial times the residual monomial.
void mono_mul_fold(const Monomial& a, const Monomial& b, AtomTable& tab, Monomial& mono_out,
                   Poly& poly_mult) {
    mono_out.clear();
    poly_mult = poly_const(Rational(1));
    size_t i = 0, j = 0;
    auto push = [&](int id, Rational e) {
        if (e.is_zero()) return;
        if (tab.is_compound(id) && (e >= Rational(1))) {
            long long n = e.floor();
            Rational frac = e - Rational(n);
            Poly bp = poly_pow(tab.base_poly(id), n, tab);
            poly_mult = poly_mul(poly_mult, bp, tab);
            if (!frac.is_zero()) mono_out.emplace_back(id, frac);
            return;
        }
        mono_out.emplace_back(id, e);
    };
    while (i < a.size() || j < b.size()) {
        if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
            push(a[i].first, a[i].second);
            ++i;
        } else if (i >= a.size() || b[j].first < a[i].first) {
            push(b[j].first, b[j].second);
            ++j;
        } else {
            push(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
}

} // namespace

Poly poly_mul(const Poly& a, const Poly& b, AtomTable& tab) {
    // accumulate pairwise products in a flat buffer, then sort and merge;
    // much cheaper than per-term ordered-map insertion on large operands
    std::vector<std::pair<Monomial, Rational>> buf;
    buf.reserve(a.size() * b.size());
    Monomial m;
    Poly mult;
    for (auto& [ma, ca] : a) {
        for (auto& [mb, cb] : b) {
            mono_mul_fold(ma, mb, tab, m, mult);
            Rational c = ca * cb;
            if (poly_is_const(mult)) {
                buf.emplace_back(m, c * poly_const_value(mult));
            } else {
                // distribute the folded base polynomial over the residual monomial
                for (auto& [mm, cc] : mult) {
                    Monomial m2;
                    Poly mult2;
                    mono_mul_fold(m, mm, tab, m2, mult2);
                    assert(poly_is_const(mult2));
                    buf.emplace_back(m2, c * cc * poly_const_value(mult2));
                }
            }
        }
    }
    MonoLess less;
    std::sort(buf.begin(), buf.end(),
              [&](const auto& x, const auto& y) { return less(x.first, y.first); });
    Poly r;
    auto hint = r.end();
    size_t i = 0;
    while (i < buf.size()) {
        Rational c = buf[i].second;
        size_t j = i + 1;
        while (j < buf.size() && buf[j].first == buf[i].first) {
            c += buf[j].second;
            ++j;
        }
        if (!c.is_zero()) hint = r.emplace_hint(r.end(), std::move(buf[i].first), c);
        i = j;
    }
    (void)hint;
    return r;
}

Poly poly_pow(const Poly& a, long long n, AtomTable& tab) {
    assert(n >= 0);
    Poly r = poly_const(Rational(1));
    Poly base = a;
    while (n) {
        if (n & 1) r = poly_mul(r, base, tab);
        n >>= 1;
        if (n) base = poly_mul(base, base, tab);
    }
    return r;
}

int poly_cmp(const Poly& a, const Poly& b) {
    auto i = a.begin();
    auto j = b.begin();
    MonoLess less;
    for (; i != a.end() && j != b.end(); ++i, ++j) {
        if (less(i->first, j->first)) return -1;
        if (less(j->first, i->first)) return 1;
        if (i->second != j->second) return i->second < j->second ? -1 : 1;
    }
    if (i != a.end()) return 1;
    if (j != b.end()) return -1;
    return 0;
}

Rational poly_content(const Poly& p) {
    if (p.empty()) return Rational(0);
    Rational g(0);
    for (auto& [m, c] : p) g = g.is_zero() ? c.abs() : Rational::gcd(g, c);
    // sign of the leading (largest) monomial's coefficient
    if (p.rbegin()->second.is_negative()) g = -g;
    return g;
}

Rational poly_content_abs(const Poly& p) {
    Rational c = poly_content(p);
    return c.is_negative() ? -c : c;
}

namespace {

// compare monomials by (degree, then lex on sorted atom print keys)
int mono_canonical_cmp(const Monomial& a, const Monomial& b, const AtomTable& tab) {
    Rational da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da < db ? -1 : 1;
    std::vector<std::pair<const std::string*, Rational>> ka, kb;
    for (auto& [id, e] : a) ka.emplace_back(&tab.skey(id), e);
    for (auto& [id, e] : b) kb.emplace_back(&tab.skey(id), e);
    auto less = [](const auto& x, const auto& y) { return *x.first < *y.first; };
    std::sort(ka.begin(), ka.end(), less);
    std::sort(kb.begin(), kb.end(), less);
    size_t i = 0;
    for (; i < ka.size() && i < kb.size(); ++i) {
        if (*ka[i].first != *kb[i].first) return *ka[i].first < *kb[i].first ? -1 : 1;
        if (ka[i].second != kb[i].second) return ka[i].second < kb[i].second ? 1 : -1;
    }
    if (i < ka.size()) return 1;
    if (i < kb.size()) return -1;
    return 0;
}

} // namespace

int poly_canonical_sign(const Poly& p, const AtomTable& tab) {
    if (p.empty()) return 0;
    const Monomial* lead = nullptr;
    const Rational* coeff = nullptr;
    for (auto& [m, c] : p) {
        if (!lead || mono_canonical_cmp(m, *lead, tab) > 0) {
            lead = &m;
            coeff = &c;
        }
    }
    return coeff->is_negative() ? -1 : 1;
}

Rational poly_content_canonical(const Poly& p, const AtomTable& tab) {
    if (p.empty()) return Rational(0);
    Rational g(0);
    for (auto& [m, c] : p) g = g.is_zero() ? c.abs() : Rational::gcd(g, c);
    if (poly_canonical_sign(p, tab) < 0) g = -g;
    return g;
}

namespace {

bool mono_divides(const Monomial& d, const Monomial& n) {
    size_t i = 0, j = 0;
    while (j < d.size()) {
        if (i >= n.size()) return false;
        if (n[i].first < d[j].first) {
            ++i;
            continue;
        }
        if (n[i].first > d[j].first) return false;
        if ((n[i].second - d[j].second).is_negative()) return false;
        ++i;
        ++j;
    }
    return true;
}

} // namespace

std::optional<Poly> poly_divide(const Poly& a, const Poly& b, AtomTable& tab) {
    if (b.empty()) return std::nullopt;
    if (poly_is_const(b)) {
        return poly_scale(a, Rational(1) / poly_const_value(b));
    }
    if (a.empty()) return Poly{};
    // necessary conditions, checked before the expensive loop
    if (!mono_divides(b.rbegin()->first, a.rbegin()->first)) return std::nullopt;
    if (!mono_divides(b.begin()->first, a.begin()->first)) return std::nullopt;
    Poly rem = a;
    Poly quot;
    auto lead_b = *b.rbegin(); // largest monomial
    int guard = 0;
    while (!rem.empty()) {
        if (++guard > 20000) return std::nullopt;
        auto lead_r = *rem.rbegin();
        // divide lead_r by lead_b
        Monomial q;
        size_t i = 0, j = 0;
        bool ok = true;
        const Monomial& mr = lead_r.first;
        const Monomial& mb = lead_b.first;
        while (j < mb.size()) {
            if (i >= mr.size()) {
                ok = false;
                break;
            }
            if (mr[i].first < mb[j].first) {
                q.emplace_back(mr[i]);
                ++i;
                continue;
            }
            if (mr[i].first > mb[j].first) {
                ok = false;
                break;
            }
            Rational e = mr[i].second - mb[j].second;
            if (e.is_negative()) {
                ok = false;
                break;
            }
            if (!e.is_zero()) q.emplace_back(mr[i].first, e);
            ++i;
            ++j;
        }
        if (!ok) return std::nullopt;
        for (; i < mr.size(); ++i) q.emplace_back(mr[i]);
        Rational qc = lead_r.second / lead_b.second;
        Poly qterm;
        qterm.emplace(q, qc);
        poly_add_term(quot, q, qc);
        // subtract qterm*b in place; rebuilding the remainder map per step
        // would make large failing divisions quadratic
        Poly prod = poly_mul(qterm, b, tab);
        for (auto& [pm, pc] : prod) poly_add_term(rem, pm, -pc);
    }
    return quot;
}

Monomial poly_common_monomial(const Poly& p) {
    if (p.empty()) return {};
    Monomial common = p.begin()->first;
    for (auto& [m, c] : p) {
        Monomial next;
        size_t i = 0, j = 0;
        while (i < common.size() && j < m.size()) {
            if (common[i].first < m[j].first) {
                ++i;
            } else if (m[j].first < common[i].first) {
                ++j;
            } else {
                Rational e = std::min(common[i].second, m[j].second);
                if (!e.is_zero() && !e.is_negative()) next.emplace_back(common[i].first, e);
                ++i;
                ++j;
            }
        }
        common = next;
        if (common.empty()) break;
    }
    return common;
}

Poly poly_shift_down(const Poly& p, const Monomial& m) {
    if (m.empty()) return p;
    Poly r;
    for (auto& [mm, c] : p) {
        Monomial q;
        size_t i = 0, j = 0;
        while (i < mm.size()) {
            if (j < m.size() && mm[i].first == m[j].first) {
                Rational e = mm[i].second - m[j].second;
                if (!e.is_zero()) q.emplace_back(mm[i].first, e);
                ++i;
                ++j;
            } else {
                q.emplace_back(mm[i]);
                ++i;
            }
        }
        r.emplace(q, c);
    }
    return r;
}

// ---- rational functions -------------------------------------------------------

RF rf_const(const Rational& c) { return RF{poly_const(c), Den{}}; }
RF rf_atom(int id, const Rational& exp) { return RF{poly_atom(id, exp), Den{}}; }
RF rf_from_poly(Poly p) { return RF{std::move(p), Den{}}; }

bool rf_is_zero(const RF& a) { return a.num.empty(); }

namespace {

bool den_equal(const Den& a, const Den& b) {
    if (a.mono != b.mono) return false;
    if (a.factors.size() != b.factors.size()) return false;
    for (size_t i = 0; i < a.factors.size(); ++i) {
        if (a.factors[i].second != b.factors[i].second) return false;
        if (poly_cmp(a.factors[i].first, b.factors[i].first) != 0) return false;
    }
    return true;
}

void den_sort(Den& d) {
    std::sort(d.factors.begin(), d.factors.end(), [](const auto& a, const auto& b) {
        return poly_cmp(a.first, b.first) < 0;
    });
    // merge equal factors
    std::vector<std::pair<Poly, int>> merged;
    for (auto& f : d.factors) {
        if (!merged.empty() && poly_cmp(merged.back().first, f.first) == 0)
            merged.back().second += f.second;
        else
            merged.push_back(f);
    }
    d.factors = std::move(merged);
}

// Multiply den mono by monomial with folding of compound integer parts
// into den factors.
void den_mono_mul(Den& d, const Monomial& m, AtomTable& tab, Rational& coeff_to_num) {
    Monomial out;
    size_t i = 0, j = 0;
    const Monomial& a = d.mono;
    auto push = [&](int id, Rational e) {
        if (e.is_zero()) return;
        assert(!e.is_negative());
        if (tab.is_compound(id) && e >= Rational(1)) {
            long long n = e.floor();
            Rational frac = e - Rational(n);
            d.factors.emplace_back(tab.base_poly(id), (int)n);
            if (!frac.is_zero()) out.emplace_back(id, frac);
            return;
        }
        out.emplace_back(id, e);
    };
    while (i < a.size() || j < m.size()) {
        if (j >= m.size() || (i < a.size() && a[i].first < m[j].first)) {
            push(a[i].first, a[i].second);
            ++i;
        } else if (i >= a.size() || m[j].first < a[i].first) {
            push(m[j].first, m[j].second);
            ++j;
        } else {
            push(a[i].first, a[i].second + m[j].second);
            ++i;
            ++j;
        }
    }
    d.mono = std::move(out);
    (void)coeff_to_num;
}

// Cancel shared structure between num and den; normalize factor contents.
void rf_normalize(RF& r, AtomTable& tab) {
    if (r.num.empty()) {
        r.den = Den{};
        return;
    }
    // primitive factors with content folded into num
    Rational scale(1);
    for (auto& [f, k] : r.den.factors) {
        // positive content only: flipping a factor's sign would poison any
        // later fractional power of this value
        Rational c = poly_content_abs(f);
        if (!c.is_one()) {
            f = poly_scale(f, Rational(1) / c);
            scale /= c.pow_int(k);
        }
    }
    if (!scale.is_one()) r.num = poly_scale(r.num, scale);
    den_sort(r.den);
    // drop constant factors
    std::vector<std::pair<Poly, int>> kept;
    for (auto& [f, k] : r.den.factors) {
        if (poly_is_const(f)) {
            Rational v = poly_const_value(f);
            r.num = poly_scale(r.num, v.pow_int(-(long long)k));
        } else if (k != 0) {
            kept.emplace_back(f, k);
        }
    }
    r.den.factors = std::move(kept);
    // cancel polynomial factors against num
    for (auto& [f, k] : r.den.factors) {
        while (k > 0) {
            auto q = poly_divide(r.num, f, tab);
            if (!q) break;
            r.num = std::move(*q);
            --k;
        }
    }
    kept.clear();
    for (auto& [f, k] : r.den.factors)
        if (k > 0) kept.emplace_back(f, k);
    r.den.factors = std::move(kept);
    // cancel the monomial part
    if (!r.den.mono.empty()) {
        Monomial num_common = poly_common_monomial(r.num);
        Monomial cancel;
        size_t i = 0, j = 0;
        while (i < num_common.size() && j < r.den.mono.size()) {
            if (num_common[i].first < r.den.mono[j].first) {
                ++i;
            } else if (r.den.mono[j].first < num_common[i].first) {
                ++j;
            } else {
                Rational e = std::min(num_common[i].second, r.den.mono[j].second);
                if (!e.is_zero()) cancel.emplace_back(num_common[i].first, e);
                ++i;
                ++j;
            }
        }
        if (!cancel.empty()) {
            r.num = poly_shift_down(r.num, cancel);
            Monomial rest;
            i = 0;
            j = 0;
            while (i < r.den.mono.size()) {
                if (j < cancel.size() && r.den.mono[i].first == cancel[j].first) {
                    Rational e = r.den.mono[i].second - cancel[j].second;
                    if (!e.is_zero()) rest.emplace_back(r.den.mono[i].first, e);
                    ++i;
                    ++j;
                } else {
                    rest.emplace_back(r.den.mono[i]);
                    ++i;
                }
            }
            r.den.mono = std::move(rest);
        }
    }
}

} // namespace

Poly den_expand(const Den& d, AtomTable& tab) {
    Poly p = poly_const(Rational(1));
    if (!d.mono.empty()) {
        Poly m;
        m.emplace(d.mono, Rational(1));
        p = m;
    }
    for (auto& [f, k] : d.factors) p = poly_mul(p, poly_pow(f, k, tab), tab);
    return p;
}

RF rf_neg(const RF& a) { return RF{poly_neg(a.num), a.den}; }

bool rf_same_den(const Den& a, const Den& b) { return den_equal(a, b); }

void rf_collapse(RF& r, AtomTable& tab) { rf_normalize(r, tab); }

RF rf_add(const RF& a, const RF& b, AtomTable& tab) {
    if (a.num.empty()) return b;
    if (b.num.empty()) return a;
    if (den_equal(a.den, b.den)) {
        RF r{poly_add(a.num, b.num), a.den};
        rf_normalize(r, tab);
        return r;
    }
    // lcm of monomial parts
    Monomial lcm_mono;
    {
        size_t i = 0, j = 0;
        const Monomial& x = a.den.mono;
        const Monomial& y = b.den.mono;
        while (i < x.size() || j < y.size()) {
            if (j >= y.size() || (i < x.size() && x[i].first < y[j].first)) {
                lcm_mono.push_back(x[i++]);
            } else if (i >= x.size() || y[j].first < x[i].first) {
                lcm_mono.push_back(y[j++]);
            } else {
                lcm_mono.emplace_back(x[i].first, std::max(x[i].second, y[j].second));
                ++i;
                ++j;
            }
        }
    }
    auto mono_quot = [&](const Monomial& lcm, const Monomial& d) {
        Monomial q;
        size_t i = 0, j = 0;
        while (i < lcm.size()) {
            if (j < d.size() && lcm[i].first == d[j].first) {
                Rational e = lcm[i].second - d[j].second;
                if (!e.is_zero()) q.emplace_back(lcm[i].first, e);
                ++i;
                ++j;
            } else {
                q.emplace_back(lcm[i]);
                ++i;
            }
        }
        return q;
    };
    // lcm of factor lists
    std::vector<std::pair<Poly, int>> lcm_fac = a.den.factors;
    for (auto& [f, k] : b.den.factors) {
        bool found = false;
        for (auto& [g, l] : lcm_fac)
            if (poly_cmp(f, g) == 0) {
                l = std::max(l, k);
                found = true;
                break;
            }
        if (!found) lcm_fac.emplace_back(f, k);
    }
    auto complement = [&](const Den& d) {
        // (lcm den)/(d) as an expanded polynomial together with a monomial
        Poly comp = poly_const(Rational(1));
        Monomial mq = mono_quot(lcm_mono, d.mono);
        if (!mq.empty()) {
            Poly pm;
            pm.emplace(mq, Rational(1));
            comp = pm;
        }
        for (auto& [f, k] : lcm_fac) {
            int have = 0;
            for (auto& [g, l] : d.factors)
                if (poly_cmp(f, g) == 0) have = l;
            if (k - have > 0) comp = poly_mul(comp, poly_pow(f, k - have, tab), tab);
        }
        return comp;
    };
    Poly na = poly_mul(a.num, complement(a.den), tab);
    Poly nb = poly_mul(b.num, complement(b.den), tab);
    RF r;
    r.num = poly_add(na, nb);
    r.den.mono = lcm_mono;
    r.den.factors = lcm_fac;
    rf_normalize(r, tab);
    return r;
}

RF rf_mul(const RF& a, const RF& b, AtomTable& tab) {
    if (a.num.empty() || b.num.empty()) return rf_const(Rational(0));
    RF r;
    r.num = poly_mul(a.num, b.num, tab);
    r.den = a.den;
    Rational dummy(1);
    den_mono_mul(r.den, b.den.mono, tab, dummy);
    for (auto& f : b.den.factors) r.den.factors.push_back(f);
    rf_normalize(r, tab);
    return r;
}

RF rf_inverse(const RF& a, AtomTable& tab) {
    if (a.num.empty()) throw std::domain_error("division by zero expression");
    RF r;
    r.num = den_expand(a.den, tab);
    // numerator becomes denominator: extract content and common monomial
    Poly n = a.num;
    Rational c = poly_content_abs(n);
    n = poly_scale(n, Rational(1) / c);
    Monomial common = poly_common_monomial(n);
    n = poly_shift_down(n, common);
    r.num = poly_scale(r.num, Rational(1) / c);
    r.den = Den{};
    // invert the common monomial: negative exponents are not allowed, they
    // flip between num and den
    Monomial den_part;
    Monomial num_part;
    for (auto& [id, e] : common) {
        if (e.is_negative())
            num_part.emplace_back(id, -e);
        else
            den_part.emplace_back(id, e);
    }
    if (!num_part.empty()) {
        Poly pm;
        pm.emplace(num_part, Rational(1));
        r.num = poly_mul(r.num, pm, tab);
    }
    Rational dummy(1);
    den_mono_mul(r.den, den_part, tab, dummy);
    if (!poly_is_const(n)) {
        r.den.factors.emplace_back(n, 1);
    } else {
        r.num = poly_scale(r.num, Rational(1) / poly_const_value(n));
    }
    rf_normalize(r, tab);
    return r;
}

RF rf_pow_int(const RF& a, long long n, AtomTable& tab) {
    if (n == 0) return rf_const(Rational(1));
    RF base = a;
    if (n < 0) {
        base = rf_inverse(a, tab);
        n = -n;
    }
    RF r = rf_const(Rational(1));
    while (n) {
        if (n & 1) r = rf_mul(r, base, tab);
        n >>= 1;
        if (n) base = rf_mul(base, base, tab);
    }
    return r;
}

} // namespace symred
