#include "symred/expr.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace symred {

namespace {

size_t mix(size_t h, size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

size_t node_hash(const ExprNode& n) {
    size_t h = (size_t)n.kind * 0x9e3779b97f4a7c15ULL;
    h = mix(h, std::hash<long long>()(n.value.num()));
    h = mix(h, std::hash<long long>()(n.value.den()));
    h = mix(h, std::hash<std::string>()(n.name));
    h = mix(h, (size_t)n.sk);
    for (auto& s : n.indeps) h = mix(h, std::hash<std::string>()(s));
    for (int o : n.orders) h = mix(h, (size_t)o + 17);
    for (int o : n.dorders) h = mix(h, (size_t)o + 31);
    for (auto& k : n.kids) h = mix(h, k->hash);
    return h;
}

Expr finish(ExprNode n) {
    n.hash = node_hash(n);
    return std::make_shared<const ExprNode>(std::move(n));
}

const Expr& zero() {
    static const Expr z = make_int(0);
    return z;
}
const Expr& one() {
    static const Expr o = make_int(1);
    return o;
}

} // namespace

Expr make_const(const Rational& v) {
    ExprNode n;
    n.kind = Kind::Const;
    n.value = v;
    return finish(std::move(n));
}

Expr make_int(long long v) { return make_const(Rational(v)); }

Expr make_symbol(const std::string& name, SymKind k) {
    ExprNode n;
    n.kind = Kind::Symbol;
    n.name = name;
    n.sk = k;
    return finish(std::move(n));
}

Expr make_jet(const std::string& field, const std::vector<std::string>& indeps,
              const std::vector<int>& orders) {
    assert(indeps.size() == orders.size());
    ExprNode n;
    n.kind = Kind::Jet;
    n.name = field;
    n.indeps = indeps;
    n.orders = orders;
    return finish(std::move(n));
}

Expr make_add(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    Rational c(0);
    for (auto& t : terms) {
        if (!t) continue;
        if (t->kind == Kind::Const) {
            c += t->value;
        } else if (t->kind == Kind::Add) {
            for (auto& k : t->kids) {
                if (k->kind == Kind::Const)
                    c += k->value;
                else
                    flat.push_back(k);
            }
        } else {
            flat.push_back(t);
        }
    }
    if (!c.is_zero() || flat.empty()) flat.push_back(make_const(c));
    if (flat.size() == 1) return flat[0];
    ExprNode n;
    n.kind = Kind::Add;
    n.kids = std::move(flat);
    return finish(std::move(n));
}

Expr make_mul(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    Rational c(1);
    for (auto& f : factors) {
        if (!f) continue;
        if (f->kind == Kind::Const) {
            c *= f->value;
        } else if (f->kind == Kind::Mul) {
            for (auto& k : f->kids) {
                if (k->kind == Kind::Const)
                    c *= k->value;
                else
                    flat.push_back(k);
            }
        } else {
            flat.push_back(f);
        }
    }
    if (c.is_zero()) return zero();
    if (flat.empty()) return make_const(c);
    if (!c.is_one()) flat.insert(flat.begin(), make_const(c));
    if (flat.size() == 1) return flat[0];
    ExprNode n;
    n.kind = Kind::Mul;
    n.kids = std::move(flat);
    return finish(std::move(n));
}

Expr make_pow(const Expr& base, const Rational& e) {
    if (e.is_zero()) return one();
    if (e.is_one()) return base;
    if (base->kind == Kind::Const) {
        // fold exact integer powers of rationals
        if (e.is_integer()) return make_const(base->value.pow_int(e.num()));
        if (base->value.is_one()) return one();
    }
    // (b^r1)^r2 -> b^(r1*r2); valid on the positive domains this engine samples
    if (base->kind == Kind::Pow) return make_pow(base->kids[0], base->value * e);
    ExprNode n;
    n.kind = Kind::Pow;
    n.value = e;
    n.kids = {base};
    return finish(std::move(n));
}

Expr make_pow(const Expr& base, const Expr& e) {
    if (e->kind == Kind::Const) return make_pow(base, e->value);
    // symbolic exponent: b^e = exp(e*ln b)
    return make_fun(Kind::Exp, make_mul({e, make_fun(Kind::Ln, base)}));
}

Expr make_fun(Kind k, const Expr& arg) {
    if (arg->kind == Kind::Const) {
        const Rational& v = arg->value;
        if (v.is_zero()) {
            switch (k) {
                case Kind::Exp: return one();
                case Kind::Sin:
                case Kind::Sinh: return zero();
                case Kind::Cos:
                case Kind::Cosh: return one();
                default: break;
            }
        }
        if (v.is_one() && k == Kind::Ln) return zero();
    }
    if (k == Kind::Ln && arg->kind == Kind::Exp) return arg->kids[0];
    ExprNode n;
    n.kind = k;
    n.kids = {arg};
    return finish(std::move(n));
}

Expr make_opaque(const std::string& name, std::vector<Expr> args, std::vector<int> dorders) {
    if (dorders.empty()) dorders.assign(args.size(), 0);
    assert(dorders.size() == args.size());
    ExprNode n;
    n.kind = Kind::Opaque;
    n.name = name;
    n.dorders = std::move(dorders);
    n.kids = std::move(args);
    return finish(std::move(n));
}

Expr make_integral(const std::string& dummy, const Expr& lo, const Expr& hi, const Expr& integrand) {
    if (is_zero_const(integrand)) return zero();
    if (expr_equal(lo, hi)) return zero();
    ExprNode n;
    n.kind = Kind::Integral;
    n.name = dummy;
    n.kids = {lo, hi, integrand};
    return finish(std::move(n));
}

Expr make_antideriv(const Expr& integrand, const std::string& var) {
    if (is_zero_const(integrand)) return zero();
    ExprNode n;
    n.kind = Kind::Antideriv;
    n.name = var;
    n.kids = {integrand};
    return finish(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
    return make_add({a, make_mul({make_int(-1), b})});
}
Expr operator-(const Expr& a) { return make_mul({make_int(-1), a}); }
Expr operator/(const Expr& a, const Expr& b) {
    return make_mul({a, make_pow(b, Rational(-1))});
}

bool is_zero_const(const Expr& e) { return e->kind == Kind::Const && e->value.is_zero(); }
bool is_one_const(const Expr& e) { return e->kind == Kind::Const && e->value.is_one(); }
bool is_const(const Expr& e, const Rational& v) { return e->kind == Kind::Const && e->value == v; }

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (a->hash != b->hash) return false;
    return expr_cmp(a, b) == 0;
}

int expr_cmp(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    auto cmpr = [](const Rational& x, const Rational& y) {
        if (x == y) return 0;
        return x < y ? -1 : 1;
    };
    if (int c = cmpr(a->value, b->value)) return c;
    if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
    if (a->sk != b->sk) return a->sk < b->sk ? -1 : 1;
    if (a->indeps != b->indeps) return a->indeps < b->indeps ? -1 : 1;
    if (a->orders != b->orders) return a->orders < b->orders ? -1 : 1;
    if (a->dorders != b->dorders) return a->dorders < b->dorders ? -1 : 1;
    if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (int c = expr_cmp(a->kids[i], b->kids[i])) return c;
    return 0;
}

// ---- printing -------------------------------------------------------------

namespace {

// precedence levels: add=1, mul=2, unary minus handled via constants, pow=3, atom=4
void print_rec(std::ostream& os, const Expr& e, int parent_prec);

void print_const(std::ostream& os, const Rational& v, int parent_prec) {
    bool need_paren = (!v.is_integer() && parent_prec >= 3) || (v.is_negative() && parent_prec >= 2);
    if (need_paren) os << '(';
    os << v.num();
    if (!v.is_integer()) os << '/' << v.den();
    if (need_paren) os << ')';
}

std::string fun_name(Kind k) {
    switch (k) {
        case Kind::Exp: return "exp";
        case Kind::Ln: return "ln";
        case Kind::Sin: return "sin";
        case Kind::Cos: return "cos";
        case Kind::Sinh: return "sinh";
        case Kind::Cosh: return "cosh";
        default: return "?";
    }
}

void print_jet(std::ostream& os, const ExprNode& n) {
    int total = 0;
    for (int o : n.orders) total += o;
    if (total == 0) {
        os << n.name;
        return;
    }
    // short suffix form when every independent name is a single letter
    bool short_ok = total <= 6;
    for (auto& s : n.indeps)
        if (s.size() != 1) short_ok = false;
    if (short_ok) {
        os << n.name << '_';
        for (size_t i = 0; i < n.indeps.size(); ++i)
            for (int k = 0; k < n.orders[i]; ++k) os << n.indeps[i];
        return;
    }
    os << "D(" << n.name;
    for (size_t i = 0; i < n.indeps.size(); ++i)
        if (n.orders[i] > 0) os << ';' << n.indeps[i] << ',' << n.orders[i];
    os << ')';
}

void print_rec(std::ostream& os, const Expr& e, int parent_prec) {
    switch (e->kind) {
        case Kind::Const:
            print_const(os, e->value, parent_prec);
            return;
        case Kind::Symbol:
            os << e->name;
            return;
        case Kind::Jet:
            print_jet(os, *e);
            return;
        case Kind::Add: {
            bool paren = parent_prec >= 2;
            if (paren) os << '(';
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << " + ";
                print_rec(os, e->kids[i], 1);
            }
            if (paren) os << ')';
            return;
        }
        case Kind::Mul: {
            bool paren = parent_prec >= 3;
            if (paren) os << '(';
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << '*';
                print_rec(os, e->kids[i], 2);
            }
            if (paren) os << ')';
            return;
        }
        case Kind::Pow: {
            bool paren = parent_prec >= 4;
            if (paren) os << '(';
            print_rec(os, e->kids[0], 4);
            os << '^';
            print_const(os, e->value, 3);
            if (paren) os << ')';
            return;
        }
        case Kind::Exp:
        case Kind::Ln:
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Sinh:
        case Kind::Cosh:
            os << fun_name(e->kind) << '(';
            print_rec(os, e->kids[0], 0);
            os << ')';
            return;
        case Kind::Opaque: {
            bool any = false;
            for (int d : e->dorders)
                if (d > 0) any = true;
            if (any) {
                os << "d(" << e->name;
                for (size_t i = 0; i < e->dorders.size(); ++i)
                    for (int k = 0; k < e->dorders[i]; ++k) os << ',' << (i + 1);
                os << ')';
            } else {
                os << e->name;
            }
            os << '(';
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << ',';
                print_rec(os, e->kids[i], 0);
            }
            os << ')';
            return;
        }
        case Kind::Integral:
            os << "Int(" << e->name << ',';
            print_rec(os, e->kids[0], 0);
            os << ',';
            print_rec(os, e->kids[1], 0);
            os << ',';
            print_rec(os, e->kids[2], 0);
            os << ')';
            return;
        case Kind::Antideriv:
            os << "Anti(";
            print_rec(os, e->kids[0], 0);
            os << ',' << e->name << ')';
            return;
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_rec(os, e, 0);
    return os.str();
}

std::string jet_key(const Expr& jet) {
    assert(jet->kind == Kind::Jet);
    std::string k = jet->name;
    for (size_t i = 0; i < jet->indeps.size(); ++i)
        if (jet->orders[i] > 0)
            k += ";" + jet->indeps[i] + "^" + std::to_string(jet->orders[i]);
    return k;
}

// ---- SymbolTable ----------------------------------------------------------

void SymbolTable::add_independent(const std::string& n) {
    symbols_[n] = SymKind::Independent;
    indep_order_.push_back(n);
}
void SymbolTable::add_parameter(const std::string& n) { symbols_[n] = SymKind::Parameter; }
void SymbolTable::add_field(const std::string& n, const std::vector<std::string>& indeps) {
    fields_[n] = FieldDecl{n, indeps};
}
void SymbolTable::add_opaque(const std::string& n, int arity) { opaques_[n] = arity; }

bool SymbolTable::is_independent(const std::string& n) const {
    auto it = symbols_.find(n);
    return it != symbols_.end() && it->second == SymKind::Independent;
}
bool SymbolTable::is_parameter(const std::string& n) const {
    auto it = symbols_.find(n);
    return it != symbols_.end() && it->second == SymKind::Parameter;
}
bool SymbolTable::is_field(const std::string& n) const { return fields_.count(n) > 0; }
bool SymbolTable::is_opaque(const std::string& n) const { return opaques_.count(n) > 0; }
int SymbolTable::opaque_arity(const std::string& n) const {
    auto it = opaques_.find(n);
    return it == opaques_.end() ? -1 : it->second;
}
const FieldDecl* SymbolTable::field(const std::string& n) const {
    auto it = fields_.find(n);
    return it == fields_.end() ? nullptr : &it->second;
}

Expr SymbolTable::sym(const std::string& n) const {
    auto it = symbols_.find(n);
    if (it != symbols_.end()) return make_symbol(n, it->second);
    auto f = fields_.find(n);
    if (f != fields_.end())
        return make_jet(n, f->second.indeps, std::vector<int>(f->second.indeps.size(), 0));
    throw std::runtime_error("unknown identifier: " + n);
}

Expr SymbolTable::jet(const std::string& fieldname, const std::vector<int>& orders) const {
    const FieldDecl* f = field(fieldname);
    if (!f) throw std::runtime_error("not a dependent field: " + fieldname);
    return make_jet(fieldname, f->indeps, orders);
}

} // namespace symred
